from django.apps import AppConfig


class MinivmConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'minivm'
    verbose_name = 'Reference interpreter'
