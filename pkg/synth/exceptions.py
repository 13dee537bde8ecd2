class SynthesisError(Exception):
    """Base class for shadow statement synthesis errors."""
    pass


class NoEligibleTarget(SynthesisError):
    """The site offers nothing the shadow statement of this kind can act on."""
    pass


class SynthesisBudgetExhausted(SynthesisError):
    """Sampling found no operand values that trigger the behaviour."""
    pass


class AnchorNotFound(SynthesisError):
    """The anchor statement does not exist in the program."""

    def __init__(self, anchor):
        self.anchor = anchor
        super().__init__(f"anchor statement {anchor} not found")
