"""
URL configuration for the reclens project.

The JSON API lives in the reclens app; see reclens/urls.py.
"""

from django.urls import include, path

urlpatterns = [
    path("", include("reclens.urls")),
]
