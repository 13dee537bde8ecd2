from django.contrib import admin
from .models import Campaign, Finding


class FindingInline(admin.TabularInline):
    model = Finding
    extra = 0
    fields = ('finding_id', 'kind', 'cfg_nocrash', 'crash_site', 'verdict')
    readonly_fields = fields

    def has_add_permission(self, request, obj=None):
        return False


class CampaignAdmin(admin.ModelAdmin):
    list_display = ('id', 'name', 'status', 'campaign_seed', 'findings_count', 'created_at')
    list_filter = ('status',)
    search_fields = ('name', 'output_root')
    readonly_fields = ('created_at', 'updated_at')
    inlines = [FindingInline]

    fieldsets = (
        ('Campaign', {
            'fields': ('name', 'output_root', 'campaign_seed', 'status')
        }),
        ('Configuration', {
            'fields': ('config', 'counters')
        }),
        ('Dates', {
            'fields': ('created_at', 'updated_at')
        }),
    )


class FindingAdmin(admin.ModelAdmin):
    list_display = ('finding_id', 'campaign', 'kind', 'compiler_id', 'sanitizer', 'opt_level', 'crash_site', 'verdict')
    list_filter = ('kind', 'sanitizer', 'opt_level', 'compiler_id', 'verdict')
    search_fields = ('finding_id', 'seed_id', 'program_hash')
    readonly_fields = ('created_at', 'dedup_key')

    fieldsets = (
        ('Finding', {
            'fields': ('campaign', 'finding_id', 'seed_id', 'kind', 'verdict', 'crash_site')
        }),
        ('Configurations', {
            'fields': ('cfg_crash', 'cfg_nocrash', 'compiler_id', 'sanitizer', 'opt_level')
        }),
        ('Program', {
            'fields': ('program_hash', 'dedup_key', 'reduced_source')
        }),
        ('Dates', {
            'fields': ('created_at',)
        }),
    )


admin.site.register(Campaign, CampaignAdmin)
admin.site.register(Finding, FindingAdmin)
