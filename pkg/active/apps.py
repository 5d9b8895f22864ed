from django.apps import AppConfig


class ActiveConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'active'
    verbose_name = 'Active training'
