"""Reduction equation systems.

The input format is the one printed by net reduction tools, one equation per
line::

    # R |- p1 = p4 + 4096
    # A |- a1 = p7 + p8

``R`` marks a redundancy (the defined place is a sum of other places and
constants) and ``A`` an agglomeration (a new place collects the tokens of the
summands). As an extension, ``>=`` and ``<=`` are accepted in place of ``=``;
:func:`desugar_inequalities` turns them into equalities with slack variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import DuplicateDefinition, ParseError, UnknownEquationKind, UnsupportedInequality


class Kind(Enum):
    REDUNDANCY = "R"
    AGGLOMERATION = "A"


@dataclass(frozen=True)
class Equation:
    """``defined = summands[0] + ... + constant`` (or ``>=``/``<=`` before desugaring)."""

    kind: Kind
    defined: str
    summands: tuple[str, ...]
    constant: int = 0
    relation: str = "="
    origin: int | None = field(default=None, compare=False)

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.defined,) + self.summands

    def removed(self) -> tuple[str, ...]:
        """Variables this equation eliminates when read as a reduction."""
        if self.kind is Kind.REDUNDANCY:
            return (self.defined,)
        return self.summands

    def __str__(self):
        return format_equation(self)


@dataclass(frozen=True)
class ReductionSystem:
    equations: tuple[Equation, ...] = ()
    slack_vars: frozenset[str] = frozenset()

    @property
    def all_vars(self) -> tuple[str, ...]:
        """Variables in order of first occurrence."""
        seen: dict[str, None] = {}
        for eq in self.equations:
            for v in eq.variables:
                seen.setdefault(v, None)
        return tuple(seen)

    @property
    def has_inequalities(self) -> bool:
        return any(eq.relation != "=" for eq in self.equations)

    def defining(self, var: str) -> Equation | None:
        for eq in self.equations:
            if eq.defined == var:
                return eq
        return None

    def max_constant(self) -> int:
        return max((eq.constant for eq in self.equations), default=0)

    def __len__(self):
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)


_LINE = re.compile(r"^#\s*(?P<tag>\S+)\s*\|-\s*(?P<body>.*)$")
_REL = re.compile(r"^(?P<lhs>[^<>=]+?)\s*(?P<rel>>=|<=|=)\s*(?P<rhs>.+)$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_.']*$")


def parse_equation(line: str, lineno: int | None = None) -> Equation:
    m = _LINE.match(line.strip())
    if m is None:
        raise ParseError(f"malformed equation line {line.strip()!r}", lineno)
    tag = m.group("tag")
    try:
        kind = Kind(tag)
    except ValueError:
        raise UnknownEquationKind(f"unknown equation kind {tag!r}", lineno) from None
    r = _REL.match(m.group("body").strip())
    if r is None:
        raise ParseError(f"expected 'v = t1 + t2 + ...', got {m.group('body').strip()!r}", lineno)
    defined = r.group("lhs").strip()
    if not _IDENT.match(defined):
        raise ParseError(f"left-hand side must be a variable, got {defined!r}", lineno)

    summands: list[str] = []
    constant = 0
    for raw in r.group("rhs").split("+"):
        term = raw.strip()
        if term.isdigit():
            constant += int(term)
        elif _IDENT.match(term):
            if term in summands:
                raise ParseError(f"multiplicity on {term!r} is not supported", lineno)
            summands.append(term)
        else:
            raise ParseError(f"bad summand {term!r}", lineno)
    if defined in summands:
        raise ParseError(f"{defined!r} occurs on both sides", lineno)
    if kind is Kind.AGGLOMERATION and constant:
        raise ParseError("agglomeration equations cannot carry constants", lineno)
    if not summands and r.group("rel") == "=":
        raise ParseError("equation needs at least one variable summand", lineno)
    return Equation(kind, defined, tuple(summands), constant, r.group("rel"), lineno)


def parse_equation_file(text: str) -> ReductionSystem:
    """Parse a reduction system; ``#`` lines without ``|-`` are comments.

    Inequalities are kept as such; see :func:`desugar_inequalities`.
    """
    equations = []
    defined_at: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#") and "|-" not in stripped:
            continue
        eq = parse_equation(stripped, lineno)
        if eq.defined in defined_at:
            raise DuplicateDefinition(
                f"{eq.defined!r} already defined on line {defined_at[eq.defined]}", lineno
            )
        defined_at[eq.defined] = lineno
        equations.append(eq)
    return ReductionSystem(tuple(equations))


def format_equation(eq: Equation) -> str:
    terms = list(eq.summands)
    if eq.constant or not terms:
        terms.append(str(eq.constant))
    return f"# {eq.kind.value} |- {eq.defined} {eq.relation} {' + '.join(terms)}"


def format_system(system: ReductionSystem) -> str:
    return "".join(format_equation(eq) + "\n" for eq in system.equations)


def desugar_inequalities(system: ReductionSystem) -> ReductionSystem:
    """Turn inequalities into ``v = sum + c`` equations with fresh slack variables.

    ``v >= t1 + ... + c`` becomes ``v = t1 + ... + c + s``. ``v <= t`` is
    re-oriented as ``t = v + s``; this needs a single variable on the right
    and no constant, otherwise :class:`UnsupportedInequality` is raised.
    """
    if not system.has_inequalities:
        return system
    used = set(system.all_vars)
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while f"_s{counter}" in used:
            counter += 1
        name = f"_s{counter}"
        used.add(name)
        return name

    out = []
    slack = set(system.slack_vars)
    redefined: set[str] = set()
    for eq in system.equations:
        if eq.relation == "=":
            out.append(eq)
            continue
        s = fresh()
        slack.add(s)
        if eq.relation == ">=":
            out.append(replace(eq, summands=eq.summands + (s,), relation="="))
            continue
        if len(eq.summands) != 1 or eq.constant:
            raise UnsupportedInequality(
                f"cannot re-orient {format_equation(eq)!r}: the slack would need a negative summand"
            )
        target = eq.summands[0]
        if eq.kind is Kind.AGGLOMERATION:
            raise UnsupportedInequality(f"cannot re-orient agglomeration {format_equation(eq)!r}")
        if target in redefined or any(e.defined == target for e in system.equations):
            raise UnsupportedInequality(f"re-orienting {format_equation(eq)!r} would define {target!r} twice")
        redefined.add(target)
        out.append(replace(eq, defined=target, summands=(eq.defined, s), relation="="))
    return ReductionSystem(tuple(out), frozenset(slack))
