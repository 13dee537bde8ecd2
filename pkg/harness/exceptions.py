class HarnessError(Exception):
    """Base class for campaign orchestration errors."""
    pass


class InvalidCampaignConfig(HarnessError):
    """The campaign configuration failed validation."""

    def __init__(self, errors):
        self.errors = errors
        super().__init__(f"invalid campaign configuration: {errors}")


class SeedSourceError(HarnessError):
    """Seeds could not be obtained from the configured source."""
    pass


class ReducerFailed(HarnessError):
    """The reducer exited with an error or lost the discrepancy."""
    pass


class FindingNotFound(HarnessError):
    """No finding with the given id in the campaign."""

    def __init__(self, finding_id):
        self.finding_id = finding_id
        super().__init__(f"finding {finding_id} not found")
