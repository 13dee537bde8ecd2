class LangError(Exception):
    """Base class for errors raised by the C front end."""
    pass


class ParseError(LangError):
    """Source text is not a program of the supported C subset."""

    def __init__(self, line, offset, message):
        self.line = line
        self.offset = offset
        self.message = message
        super().__init__(f"{line}:{offset}: {message}")


class UnknownNode(LangError):
    """A node id does not exist in the tree."""

    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"unknown node id {node_id}")
