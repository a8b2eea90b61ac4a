class ParseError(ValueError):
    """Malformed input text. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ModelError(ValueError):
    """A structure violates the invariants an operation requires."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class PreconditionError(ValueError):
    pass


class ResourceLimitExceeded(RuntimeError):
    """The search exceeded its configured bound; the answer is unknown, not unsat."""
