class ToolchainError(Exception):
    """Base class for compiler, sanitizer and debugger adapter errors."""
    pass


class UnsupportedConfig(ToolchainError):
    """The compiler cannot build with the requested sanitizer or optimization level."""
    pass


class ToolMissing(ToolchainError):
    """A required executable was not found."""

    def __init__(self, tool):
        self.tool = tool
        super().__init__(f"tool not found: {tool}")


class CompileFailed(ToolchainError):
    """The compiler rejected the program."""

    def __init__(self, source, stderr):
        self.source = source
        self.stderr = stderr
        first = stderr.strip().splitlines()[0] if stderr.strip() else 'no diagnostics'
        super().__init__(f"compilation of {source} failed: {first}")


class RunTimeout(ToolchainError):
    """A program or debugger session exceeded its time budget."""
    pass


class InvalidInjection(ToolchainError):
    """Malformed false-negative injection rules."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        self.message = message
        super().__init__(f"injection line {lineno}: {message}")
