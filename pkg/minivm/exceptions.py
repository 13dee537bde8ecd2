class VmError(Exception):
    """Base class for interpreter errors."""
    pass


class UnsupportedConstruct(VmError):
    """The program uses a construct the interpreter does not execute."""

    def __init__(self, what, loc=None):
        self.what = what
        self.loc = loc
        where = f" at {loc}" if loc is not None else ""
        super().__init__(f"unsupported construct {what}{where}")


class InvalidFree(VmError):
    """free() of a pointer that is not the start of a heap block."""
    pass


class CallDepthExceeded(VmError):
    """Recursion deeper than the interpreter's frame limit."""
    pass
