from django.apps import AppConfig


class ReclensConfig(AppConfig):
    name = "reclens"
    verbose_name = "Recommendation impact evaluation"
