from django.urls import path
from . import views

urlpatterns = [
    path('campaigns/', views.campaign_list, name='campaign_list'),
    path('campaigns/<int:pk>/', views.campaign_detail, name='campaign_detail'),
    path('campaigns/<int:pk>/report/', views.campaign_report, name='campaign_report'),
    path('campaigns/<int:pk>/findings/', views.finding_list, name='finding_list'),
    path('campaigns/<int:pk>/findings/<str:finding_id>/', views.finding_detail, name='finding_detail'),
]
