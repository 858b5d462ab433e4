"""Exception hierarchy shared by the package."""


class DagPosteriorError(Exception):
    """Base class for all errors raised by :mod:`dagposterior`."""


class ParseError(DagPosteriorError, ValueError):
    """Malformed input document. ``lineno`` is 1-based, or None when unknown."""

    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class GraphError(DagPosteriorError, ValueError):
    """Structural problem with a graph (unknown node, cycle, non-edge)."""


class PathCapExceeded(DagPosteriorError, RuntimeError):
    """Path enumeration produced more paths than the configured cap."""


class NumericError(DagPosteriorError, ArithmeticError):
    """Degenerate numeric input, e.g. a zero denominator in a Bayes inversion."""
