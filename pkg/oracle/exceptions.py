class OracleError(Exception):
    """Base class for crash-site oracle errors."""
    pass


class PreconditionViolated(OracleError):
    """The trace pair does not consist of one crashing and one normally exiting binary."""
    pass


class DebuggerSpawnFailure(OracleError):
    """The debugger could not be started."""
    pass


class NoDebugInfo(OracleError):
    """The binary carries no source mapping for the program file."""
    pass


class StepBudgetExceeded(OracleError):
    """Stepping stopped at the instruction budget."""

    def __init__(self, trace):
        self.trace = trace
        super().__init__(f"step budget exceeded after {len(trace)} sites")
