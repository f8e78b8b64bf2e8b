"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PolyprojError(Exception):
    """Base class for every error raised by this package."""


class ParseError(PolyprojError):
    """Syntax error in one of the text formats.

    ``line`` is the 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        where = self.source or ""
        if self.line is not None:
            where = f"{where}:{self.line}" if where else f"line {self.line}"
        return f"{where}: {self.message}" if where else self.message

    def with_source(self, source: str) -> "ParseError":
        self.source = source
        self.args = (self._render(),)
        return self


class MalformedAtom(ParseError):
    """Atom that is not a linear comparison (e.g. a product of variables)."""


class DnfBlowup(PolyprojError):
    """DNF conversion exceeded the configured number of cubes."""


class UnboundVariable(PolyprojError, KeyError):
    """A formula mentions a variable missing from the valuation."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class UnknownEquationKind(ParseError):
    pass


class DuplicateDefinition(ParseError):
    pass


class UnsupportedInequality(PolyprojError):
    pass


class UnknownNode(PolyprojError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class ProgressFailure(PolyprojError):
    """No elimination step applies although non-root nodes remain."""


class PolarizationViolated(PolyprojError):
    pass


class UnknownVariable(PolyprojError):
    """A cube mentions a variable that is not a node of the token flow graph."""


class UnknownTransition(PolyprojError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class CapExceeded(PolyprojError):
    """State enumeration hit its cap; ``partial`` holds what was explored."""

    def __init__(self, cap: int, partial=None):
        self.cap = cap
        self.partial = partial if partial is not None else set()
        super().__init__(f"state cap of {cap} exceeded")


class EnumerationTooLarge(PolyprojError):
    pass
