from django.apps import AppConfig


class ToolchainConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'toolchain'
    verbose_name = 'Compilers and sanitizers'
