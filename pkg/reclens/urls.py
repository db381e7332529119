from django.urls import path

from . import views

urlpatterns = [
    path("report", views.report_view, name="report"),
    path("metrics", views.metrics_view, name="metrics"),
]
