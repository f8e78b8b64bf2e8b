"""Fast variable elimination along a token flow graph.

Each cube of a DNF query is rewritten step by step following an elimination
schedule. Redundancies are substituted away; agglomerations are eliminated
exactly when the removed variables are polarized (one of them always has the
highest coefficient) and approximately otherwise. The approximation goes in
one direction per run: ``UNDER`` keeps witnesses (the result implies the
original up to the reduction), ``OVER`` keeps invariants (the converse).
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

from .errors import PolarizationViolated, UnknownVariable
from .linalg import (
    DEFAULT_CUBE_CAP,
    TAUT,
    UNSAT,
    Cube,
    DnfFormula,
    Literal,
    QueryFormula,
    Trivial,
    format_query,
    simplify_cube,
    substitute,
    to_dnf,
)
from .tfg import Agg, EliminationStep, Red, Slack, TokenFlowGraph


class Direction(Enum):
    UNDER = "under"
    OVER = "over"


LABELS = {None: "exact", Direction.UNDER: "under-approximation", Direction.OVER: "over-approximation"}


def hlf(xs: Iterable[str], cube: Cube | Sequence[Literal]) -> frozenset[str]:
    """Highest literal factor of ``xs``: members with the maximal coefficient in every literal.

    Variables absent from a literal count with coefficient 0. An empty
    result means ``xs`` is not polarized with respect to the cube.
    """
    xs = tuple(xs)
    if not xs:
        raise ValueError("hlf needs a non-empty set of variables")
    out = set(xs)
    for lit in cube:
        best = max(lit.coef(x) for x in xs)
        out &= {x for x in xs if lit.coef(x) == best}
        if not out:
            break
    return frozenset(out)


def apply_red(cube: Cube, step: Red) -> Cube:
    """Substitute the removed place by the sum of its sources (plus constant)."""
    repl = {s: 1 for s in step.sources}
    return Cube(tuple(substitute(lit, step.target, repl, step.constant) for lit in cube.split()))


def _collapse(lit: Literal, xs: Sequence[str], xj: str, a: str) -> Literal:
    """``lit{x <- 0 for x != xj}{xj <- a}``."""
    coeffs = dict(lit.coeffs)
    k = coeffs.get(xj, 0)
    for x in xs:
        coeffs.pop(x, None)
    if k:
        coeffs[a] = coeffs.get(a, 0) + k
    return Literal(coeffs, lit.bias, lit.eq)


def apply_agp(cube: Cube, step: Agg, xj: str) -> Cube:
    """Polarized agglomeration: keep ``xj`` (renamed to the source), drop the rest."""
    cube = cube.split()
    if xj not in hlf(step.targets, cube):
        raise PolarizationViolated(f"{xj} is not in the highest literal factor of {set(step.targets)}")
    return Cube(tuple(_collapse(lit, step.targets, xj, step.source) for lit in cube))


def _pick(coef: Callable[[str], int], xs: Sequence[str], direction: Direction, key) -> str:
    if direction is Direction.UNDER:
        return min(xs, key=lambda x: (coef(x), key(x)))
    return min(xs, key=lambda x: (-coef(x), key(x)))


def apply_agd(cube: Cube, step: Agg, direction: Direction = Direction.UNDER, order=None) -> Cube:
    """Non-polarized agglomeration, one choice per literal.

    ``UNDER`` keeps the variable with the smallest coefficient in each
    literal, ``OVER`` the one with the largest. Ties go to the first variable
    in ``order`` (default: the order of ``step.targets``).
    """
    key = order or step.targets.index
    out = []
    for lit in cube.split():
        xj = _pick(lit.coef, step.targets, direction, key)
        out.append(_collapse(lit, step.targets, xj, step.source))
    return Cube(tuple(out))


@dataclass
class StepCounts:
    red: int = 0
    agp: int = 0
    agd: int = 0
    slack: int = 0
    slack_touched: int = 0
    literals_before: int = 0
    literals_after: int = 0

    @property
    def steps(self) -> int:
        return self.red + self.agp + self.agd + self.slack

    def add(self, other: "StepCounts"):
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))


@dataclass
class CubeProjection:
    result: Cube | Trivial
    exact: bool
    counts: StepCounts


class _Work:
    """Mutable copy of a cube with a variable -> literal index."""

    def __init__(self, literals: Sequence[Literal]):
        self.coeffs = [dict(l.coeffs) for l in literals]
        self.bias = [l.bias for l in literals]
        self.occ: dict[str, set[int]] = {}
        for i, c in enumerate(self.coeffs):
            for v in c:
                self.occ.setdefault(v, set()).add(i)

    def _add(self, i: int, var: str, k: int):
        c = self.coeffs[i]
        new = c.get(var, 0) + k
        if new:
            c[var] = new
            self.occ.setdefault(var, set()).add(i)
        elif var in c:
            del c[var]
            self.occ[var].discard(i)

    def _drop(self, i: int, var: str) -> int:
        k = self.coeffs[i].pop(var, 0)
        if k:
            self.occ[var].discard(i)
        return k

    def red(self, step: Red):
        for i in list(self.occ.get(step.target, ())):
            k = self._drop(i, step.target)
            for s in step.sources:
                self._add(i, s, k)
            self.bias[i] += k * step.constant

    def agg(self, step: Agg, direction: Direction, key) -> bool:
        """Returns True when the step was polarized."""
        xs = step.targets
        touched: set[int] = set()
        for x in xs:
            touched |= self.occ.get(x, set())
        if not touched:
            return True
        common = set(xs)
        for i in touched:
            c = self.coeffs[i]
            best = max(c.get(x, 0) for x in xs)
            common &= {x for x in xs if c.get(x, 0) == best}
            if not common:
                break
        if common:
            xj = min(common, key=key)
            choice = {i: xj for i in touched}
        else:
            choice = {i: _pick(lambda x, c=self.coeffs[i]: c.get(x, 0), xs, direction, key) for i in touched}
        for i, xj in choice.items():
            k = self.coeffs[i].get(xj, 0)
            for x in xs:
                self._drop(i, x)
            if k:
                self._add(i, step.source, k)
        return bool(common)

    def slack(self, step: Slack, direction: Direction) -> bool:
        """Existentially drop a slack root; returns True when it occurred."""
        touched = list(self.occ.get(step.var, ()))
        for i in touched:
            k = self._drop(i, step.var)
            if direction is Direction.OVER and k > 0:
                # exists s >= 0 with k*s + rest >= 0: always true
                for v in list(self.coeffs[i]):
                    self._drop(i, v)
                self.bias[i] = 0
        return bool(touched)

    def literals(self) -> tuple[Literal, ...]:
        return tuple(Literal(c, b) for c, b in zip(self.coeffs, self.bias))


def project_cube(
    g: TokenFlowGraph,
    schedule: Sequence[EliminationStep],
    cube: Cube,
    direction: Direction = Direction.UNDER,
    on_step: Callable[[EliminationStep, int], None] | None = None,
) -> CubeProjection:
    """Eliminate every non-root variable of ``cube`` by running ``schedule``.

    The result is simplified and only mentions places of ``g.p2``. It is
    exact unless some agglomeration was not polarized or a slack variable
    occurring in the cube had to be dropped.
    """
    cube = cube.split()
    for v in cube.variables:
        if v not in g:
            raise UnknownVariable(f"{v!r} is not a variable of the reduction system")
    counts = StepCounts(literals_before=len(cube.literals))
    work = _Work(cube.literals)
    n = len(cube.literals)
    key = g.order
    exact = True
    for step in schedule:
        if isinstance(step, Red):
            work.red(step)
            counts.red += 1
        elif isinstance(step, Agg):
            if work.agg(step, direction, key):
                counts.agp += 1
            else:
                counts.agd += 1
                exact = False
        elif isinstance(step, Slack):
            counts.slack += 1
            if work.slack(step, direction):
                counts.slack_touched += 1
                exact = False
        else:
            raise TypeError(f"unknown elimination step {step!r}")
        if on_step is not None:
            on_step(step, n)

    result = simplify_cube(Cube(work.literals()))
    if isinstance(result, Cube):
        counts.literals_after = result.size()
        stray = result.variables - g.p2
        if stray:
            raise AssertionError(f"projection left non-root variables {sorted(stray)}")
    return CubeProjection(result, exact, counts)


@dataclass
class ProjectionResult:
    """Projected EF-normalized body of a query, with exactness information."""

    kind: str
    formula: DnfFormula
    exact: bool
    direction: Direction
    counts: StepCounts = field(default_factory=StepCounts)
    cubes_before: int = 0

    @property
    def approximation(self) -> Direction | None:
        return None if self.exact else self.direction

    @property
    def label(self) -> str:
        return LABELS[self.approximation]

    @property
    def query(self) -> str:
        return format_query(self.kind, self.formula)


def default_direction(kind: str) -> Direction:
    return Direction.UNDER if kind == "EF" else Direction.OVER


def project_dnf(
    g: TokenFlowGraph,
    schedule: Sequence[EliminationStep],
    formula: DnfFormula,
    direction: Direction,
) -> tuple[DnfFormula, bool, StepCounts]:
    counts = StepCounts()
    exact = True
    cubes: list[Cube] = []
    seen: set[Cube] = set()
    tautology = False
    for cube in formula.cubes:
        res = project_cube(g, schedule, cube, direction)
        counts.add(res.counts)
        exact &= res.exact
        if res.result is UNSAT:
            continue
        if res.result is TAUT:
            tautology = True
            continue
        if res.result not in seen:
            seen.add(res.result)
            cubes.append(res.result)
    if tautology:
        cubes = [Cube()]
    return DnfFormula(tuple(cubes)), exact, counts


def project_query(
    g: TokenFlowGraph,
    schedule: Sequence[EliminationStep],
    query: QueryFormula,
    direction: Direction | None = None,
    cube_cap: int = DEFAULT_CUBE_CAP,
) -> ProjectionResult:
    """Project a query onto the places of the reduced net.

    AG queries are handled as ``not EF not body``: the negated body is
    projected, by default with ``OVER`` so that invariants transfer.
    """
    if direction is None:
        direction = default_direction(query.kind)
    dnf = to_dnf(query.ef_body(), cube_cap)
    formula, exact, counts = project_dnf(g, schedule, dnf, direction)
    return ProjectionResult(query.kind, formula, exact, direction, counts, len(dnf.cubes))


def format_projection(result: ProjectionResult) -> str:
    c = result.counts
    lines = [
        f"# projection: {result.label}",
        f"# steps: RED={c.red} AGP={c.agp} AGD={c.agd}",
        f"# literals: {c.literals_before} -> {c.literals_after}",
    ]
    if c.slack_touched:
        lines.append(f"# slack variables eliminated: {c.slack_touched}")
    if result.kind == "AG":
        lines.append("# polarity: AG F = not EF not F; the projection flag applies to not F")
    lines.append(result.query)
    return "\n".join(lines) + "\n"
