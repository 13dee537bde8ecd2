from django.shortcuts import get_object_or_404
from rest_framework import status
from rest_framework.decorators import api_view, permission_classes
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response

from .models import Campaign, Finding
from .report import build_report
from .serializers import CampaignDetailSerializer, CampaignSerializer, FindingSerializer

FINDING_FILTERS = ('kind', 'sanitizer', 'opt_level', 'verdict', 'compiler_id')


@api_view(['GET'])
@permission_classes([IsAuthenticated])
def campaign_list(request):
    """All campaigns, newest first"""
    campaigns = Campaign.objects.all().order_by('-created_at')

    # Filter by status if provided
    status_filter = request.query_params.get('status')
    if status_filter:
        campaigns = campaigns.filter(status=status_filter)

    serializer = CampaignSerializer(campaigns, many=True)
    return Response(serializer.data)


@api_view(['GET'])
@permission_classes([IsAuthenticated])
def campaign_detail(request, pk):
    campaign = get_object_or_404(Campaign, pk=pk)
    serializer = CampaignDetailSerializer(campaign)
    return Response(serializer.data)


@api_view(['GET'])
@permission_classes([IsAuthenticated])
def campaign_report(request, pk):
    """Report folded from the campaign's logs on disk"""
    try:
        campaign = Campaign.objects.get(pk=pk)
    except Campaign.DoesNotExist:
        return Response({"error": "Campaign not found"}, status=status.HTTP_404_NOT_FOUND)

    # Fold the logs on disk into a fresh report
    report = build_report(campaign.output_root)
    if not report.counters and not report.findings:
        return Response({"error": "No campaign data on disk"}, status=status.HTTP_404_NOT_FOUND)
    return Response(report.to_dict())


@api_view(['GET'])
@permission_classes([IsAuthenticated])
def finding_list(request, pk):
    try:
        campaign = Campaign.objects.get(pk=pk)
    except Campaign.DoesNotExist:
        return Response({"error": "Campaign not found"}, status=status.HTTP_404_NOT_FOUND)

    findings = campaign.findings.all()
    # Optional filtering on any of the finding fields
    for name in FINDING_FILTERS:
        value = request.query_params.get(name)
        if value:
            findings = findings.filter(**{name: value})

    serializer = FindingSerializer(findings, many=True)
    return Response(serializer.data)


@api_view(['GET'])
@permission_classes([IsAuthenticated])
def finding_detail(request, pk, finding_id):
    try:
        finding = Finding.objects.get(campaign_id=pk, finding_id=finding_id)
    except Finding.DoesNotExist:
        return Response({"error": "Finding not found"}, status=status.HTTP_404_NOT_FOUND)

    serializer = FindingSerializer(finding)
    return Response(serializer.data)
