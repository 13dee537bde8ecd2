"""
URL configuration for the ubfuzz project.

Campaign and finding endpoints live under /api/ (see harness.urls).
"""
from django.contrib import admin
from django.urls import path, include
from .health_check import health_check, readiness_check, liveness_check

urlpatterns = [
    # Health check endpoints for containers
    path('health/', health_check, name='health_check'),
    path('health/ready/', readiness_check, name='readiness_check'),
    path('health/live/', liveness_check, name='liveness_check'),

    # Django admin
    path('admin/', admin.site.urls),

    # Campaigns and findings
    path('api/', include('harness.urls')),
]
