"""Exception types shared across the toolkit."""


class TemplinkError(Exception):
    """Base class for all toolkit errors."""


class ParseError(TemplinkError):
    """A data file is malformed. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IntegrityError(TemplinkError):
    """Loaded data violates a structural invariant (e.g. a second death)."""


class UnknownNodeError(TemplinkError, KeyError):
    """A queried character is not part of the graph."""

    def __str__(self):
        # KeyError repr()s its argument; keep the plain message readable.
        return Exception.__str__(self)


class ConvergenceError(TemplinkError):
    """An iterative solver ran out of iterations. Carries the last iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last
