class ProfileError(Exception):
    """Base class for instrumentation and profiling errors."""
    pass


class InstrumentError(ProfileError):
    """A site could not be instrumented."""
    pass


class NotLive(ProfileError):
    """The site was never executed during the profiling run."""

    def __init__(self, site):
        self.site = site
        super().__init__(f"site {site} was not executed")


class NotAPointer(ProfileError):
    """The site has no recorded memory access."""

    def __init__(self, site):
        self.site = site
        super().__init__(f"site {site} does not access memory")


class UnknownAddress(ProfileError):
    """An accessed address lies in no observed object."""

    def __init__(self, site, address):
        self.site = site
        self.address = address
        super().__init__(f"address 0x{address:x} at {site} is in no known object")


class UnknownDeclaration(ProfileError):
    """No scope is known for the declaration or site."""
    pass


class RunCrashed(ProfileError):
    """The instrumented seed did not exit normally."""

    def __init__(self, outcome):
        self.outcome = outcome
        super().__init__(f"profiling run ended with {outcome}")


class CorruptLog(ProfileError):
    """The profile log is truncated or holds an unknown record."""
    pass
