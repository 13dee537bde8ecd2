# Generated by Django 4.2.13 on 2026-10-19 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Campaign',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=100)),
                ('output_root', models.CharField(max_length=500, unique=True)),
                ('campaign_seed', models.BigIntegerField(default=0)),
                ('config', models.JSONField(default=dict)),
                ('status', models.CharField(choices=[('running', 'Running'), ('finished', 'Finished'), ('failed', 'Failed')], default='running', max_length=20)),
                ('counters', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
        ),
        migrations.CreateModel(
            name='Finding',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('finding_id', models.CharField(max_length=64)),
                ('seed_id', models.CharField(max_length=200)),
                ('kind', models.CharField(choices=[('BufOverflowArray', 'BufOverflowArray'), ('BufOverflowPointer', 'BufOverflowPointer'), ('UseAfterFree', 'UseAfterFree'), ('UseAfterScope', 'UseAfterScope'), ('NullPtrDeref', 'NullPtrDeref'), ('IntegerOverflow', 'IntegerOverflow'), ('ShiftOverflow', 'ShiftOverflow'), ('DivideByZero', 'DivideByZero'), ('UseOfUninitMemory', 'UseOfUninitMemory')], max_length=30)),
                ('cfg_crash', models.CharField(max_length=100)),
                ('cfg_nocrash', models.CharField(max_length=100)),
                ('compiler_id', models.CharField(max_length=50)),
                ('sanitizer', models.CharField(choices=[('ASan', 'AddressSanitizer'), ('UBSan', 'UndefinedBehaviorSanitizer'), ('MSan', 'MemorySanitizer')], max_length=10)),
                ('opt_level', models.CharField(choices=[('O0', '-O0'), ('O1', '-O1'), ('Os', '-Os'), ('O2', '-O2'), ('O3', '-O3')], max_length=5)),
                ('crash_site', models.CharField(max_length=30)),
                ('verdict', models.CharField(choices=[('FnBug', 'Sanitizer false negative'), ('OptimizedAway', 'UB optimized away'), ('NoDiscrepancy', 'No discrepancy'), ('Inconclusive', 'Inconclusive')], max_length=20)),
                ('program_hash', models.CharField(max_length=64)),
                ('dedup_key', models.CharField(max_length=300)),
                ('reduced_source', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('campaign', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='findings', to='harness.campaign')),
            ],
            options={
                'ordering': ['id'],
            },
        ),
        migrations.AddConstraint(
            model_name='finding',
            constraint=models.UniqueConstraint(fields=('campaign', 'dedup_key'), name='unique_finding_per_campaign'),
        ),
        migrations.AddConstraint(
            model_name='finding',
            constraint=models.UniqueConstraint(fields=('campaign', 'finding_id'), name='unique_finding_id_per_campaign'),
        ),
    ]
