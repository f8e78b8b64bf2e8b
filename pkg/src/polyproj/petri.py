"""Petri net semantics and brute-force oracles.

Everything here is deliberately naive: explicit breadth-first enumeration of
reachable markings, seeded random walks, and backtracking search for integer
solutions of a reduction system. These are the reference points the
projection is checked against, so they share no code with it beyond
literal evaluation.

Markings are tuples of token counts aligned with ``net.places``.

Net file format (one declaration per line, ``#`` comments)::

    pl <place> (<tokens>)          # tokens optional, default 0
    tr <name> <inputs> -> <outputs>   # each place may carry *k for weight k
"""

from __future__ import annotations

import random
import re
from collections import deque
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import CapExceeded, EnumerationTooLarge, ParseError, UnknownTransition
from .linalg import Cube, DnfFormula, Literal, evaluate, natural_key
from .redsys import Kind, ReductionSystem, desugar_inequalities

Marking = tuple[int, ...]

DEFAULT_STATE_CAP = 100_000
DEFAULT_MAX_POINTS = 10**7


@dataclass(frozen=True, eq=False)
class PetriNet:
    places: tuple[str, ...]
    transitions: tuple[str, ...]
    pre: Mapping[str, Mapping[str, int]]
    post: Mapping[str, Mapping[str, int]]
    m0: Marking

    def __post_init__(self):
        index = {p: i for i, p in enumerate(self.places)}
        vec = {}
        for t in self.transitions:
            need = tuple((index[p], w) for p, w in self.pre.get(t, {}).items() if w)
            delta: dict[int, int] = {}
            for p, w in self.pre.get(t, {}).items():
                delta[index[p]] = delta.get(index[p], 0) - w
            for p, w in self.post.get(t, {}).items():
                delta[index[p]] = delta.get(index[p], 0) + w
            vec[t] = (need, tuple((i, d) for i, d in delta.items() if d))
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_vec", vec)

    def marking(self, tokens: Mapping[str, int]) -> Marking:
        """Marking from a mapping; absent places hold no tokens."""
        unknown = set(tokens) - set(self.places)
        if unknown:
            raise KeyError(f"unknown places {sorted(unknown)}")
        return tuple(int(tokens.get(p, 0)) for p in self.places)

    def as_dict(self, m: Marking) -> dict[str, int]:
        return dict(zip(self.places, m))

    def enabled(self, m: Marking) -> list[str]:
        return [t for t in self.transitions if all(m[i] >= w for i, w in self._vec[t][0])]


def parse_net(text: str) -> PetriNet:
    places: dict[str, int] = {}
    declared: set[str] = set()
    transitions: list[str] = []
    pre: dict[str, dict[str, int]] = {}
    post: dict[str, dict[str, int]] = {}

    def arc_list(items: list[str], lineno: int) -> dict[str, int]:
        out: dict[str, int] = {}
        for item in items:
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_.']*)(?:\*(-?\d+))?", item)
            if m is None:
                raise ParseError(f"bad arc {item!r}", lineno)
            w = int(m.group(2)) if m.group(2) is not None else 1
            if w < 1:
                raise ParseError(f"arc weight must be positive, got {w}", lineno)
            p = m.group(1)
            places.setdefault(p, 0)
            out[p] = out.get(p, 0) + w
        return out

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "net":
            continue
        if words[0] == "pl":
            m = re.fullmatch(r"pl\s+([A-Za-z_][A-Za-z0-9_.']*)\s*(?:\(\s*(-?\d+)\s*\))?", line)
            if m is None:
                raise ParseError(f"bad place declaration {line!r}", lineno)
            tokens = int(m.group(2)) if m.group(2) is not None else 0
            if tokens < 0:
                raise ParseError(f"negative marking for {m.group(1)}", lineno)
            if m.group(1) in declared:
                raise ParseError(f"place {m.group(1)} declared twice", lineno)
            declared.add(m.group(1))
            places[m.group(1)] = tokens
        elif words[0] == "tr":
            if len(words) < 2 or "->" not in words:
                raise ParseError(f"bad transition {line!r}", lineno)
            name = words[1]
            if name in pre:
                raise ParseError(f"duplicate transition {name}", lineno)
            arrow = words.index("->")
            if arrow < 2 and words[1] == "->":
                raise ParseError("transition needs a name", lineno)
            transitions.append(name)
            pre[name] = arc_list(words[2:arrow], lineno)
            post[name] = arc_list(words[arrow + 1:], lineno)
        else:
            raise ParseError(f"unknown declaration {words[0]!r}", lineno)

    names = tuple(places)
    return PetriNet(names, tuple(transitions), pre, post, tuple(places[p] for p in names))


def fire(net: PetriNet, m: Marking, t: str) -> Marking | None:
    """``m - Pre(t) + Post(t)``, or None when ``t`` is not enabled at ``m``."""
    try:
        need, delta = net._vec[t]
    except KeyError:
        raise UnknownTransition(f"unknown transition {t!r}") from None
    for i, w in need:
        if m[i] < w:
            return None
    out = list(m)
    for i, d in delta:
        out[i] += d
    return tuple(out)


def _successors(net: PetriNet, m: Marking) -> Iterator[tuple[str, Marking]]:
    for t in net.transitions:
        m2 = fire(net, m, t)
        if m2 is not None:
            yield t, m2


def reachable_markings(net: PetriNet, state_cap: int = DEFAULT_STATE_CAP) -> set[Marking]:
    """All markings reachable from ``net.m0`` (breadth first).

    Raises :class:`CapExceeded`, carrying the markings found so far, when
    more than ``state_cap`` markings exist.
    """
    if state_cap < 1:
        raise ValueError("state_cap must be at least 1")
    seen = {net.m0}
    queue = deque([net.m0])
    while queue:
        m = queue.popleft()
        for _, m2 in _successors(net, m):
            if m2 not in seen:
                if len(seen) >= state_cap:
                    raise CapExceeded(state_cap, seen)
                seen.add(m2)
                queue.append(m2)
    return seen


@dataclass
class ReachReport:
    verdict: str  # "reachable", "unreachable" or "inconclusive"
    witness: dict[str, int] | None = None
    trace: tuple[str, ...] = ()
    reason: str | None = None
    states_explored: int = 0

    @property
    def reachable(self) -> bool:
        return self.verdict == "reachable"

    @property
    def unreachable(self) -> bool:
        return self.verdict == "unreachable"

    def __str__(self):
        if self.reachable:
            return f"reachable (witness {self.witness}, trace {' '.join(self.trace) or '<empty>'})"
        if self.unreachable:
            return f"unreachable ({self.states_explored} states)"
        return f"inconclusive ({self.reason})"


def _sat(net: PetriNet, body: DnfFormula | Cube, m: Marking) -> bool:
    return evaluate(body, net.as_dict(m))


def random_walk(net: PetriNet, body: DnfFormula | Cube, max_steps: int, seed: int | None = 0) -> ReachReport:
    """Fire uniformly chosen enabled transitions until ``body`` holds.

    Uses :class:`random.Random` seeded with ``seed``; at each step the next
    transition is ``rng.choice`` over the enabled ones in declaration order.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    rng = random.Random(seed)
    m = net.m0
    trace: list[str] = []
    for step in range(max_steps + 1):
        if _sat(net, body, m):
            return ReachReport("reachable", net.as_dict(m), tuple(trace), states_explored=step + 1)
        if step == max_steps:
            break
        enabled = net.enabled(m)
        if not enabled:
            return ReachReport("inconclusive", reason="deadlock", trace=tuple(trace), states_explored=step + 1)
        t = rng.choice(enabled)
        m = fire(net, m, t)
        trace.append(t)
    return ReachReport("inconclusive", reason="steps", trace=tuple(trace), states_explored=max_steps + 1)


def check_reachable(net: PetriNet, body: DnfFormula | Cube, state_cap: int = DEFAULT_STATE_CAP) -> ReachReport:
    """Exhaustive breadth-first search for a marking satisfying ``body``."""
    parent: dict[Marking, tuple[Marking, str] | None] = {net.m0: None}
    queue = deque([net.m0])
    while queue:
        m = queue.popleft()
        if _sat(net, body, m):
            trace = []
            cur = m
            while parent[cur] is not None:
                prev, t = parent[cur]
                trace.append(t)
                cur = prev
            return ReachReport("reachable", net.as_dict(m), tuple(reversed(trace)), states_explored=len(parent))
        for t, m2 in _successors(net, m):
            if m2 not in parent:
                if len(parent) >= state_cap:
                    return ReachReport("inconclusive", reason="cap", states_explored=len(parent))
                parent[m2] = (m, t)
                queue.append(m2)
    return ReachReport("unreachable", states_explored=len(parent))


# --------------------------------------------------------------------------
# Integer solutions of reduction systems


def _system_rows(system: ReductionSystem) -> list[tuple[dict[str, int], int]]:
    """Each equation as ``sum(coeffs) + const = 0``."""
    rows = []
    for eq in desugar_inequalities(system).equations:
        coeffs = {eq.defined: 1}
        for s in eq.summands:
            coeffs[s] = coeffs.get(s, 0) - 1
        rows.append((coeffs, -eq.constant))
    return rows


def propagated_bounds(system: ReductionSystem, base: int | Mapping[str, int]) -> dict[str, int]:
    """Upper bounds on every variable given bounds on the free ones.

    Free variables (never defined, or explicitly given in ``base``) get
    their base bound; a redundancy is bounded by the sum of its sources and
    constant; an agglomerated variable by its agglomeration. Any solution
    whose free variables respect the base bounds respects the result.
    """
    system = desugar_inequalities(system)
    default = base if isinstance(base, int) else None
    given = {} if isinstance(base, int) else dict(base)
    defs = {}
    child_of = {}
    for eq in system.equations:
        if eq.kind is Kind.REDUNDANCY:
            defs[eq.defined] = eq
        else:
            for s in eq.summands:
                child_of[s] = eq.defined
    out: dict[str, int] = {}

    def bound(v: str, depth: int = 0) -> int:
        if v in out:
            return out[v]
        if depth > len(system.all_vars) + 1:
            raise ValueError("cyclic reduction system")
        if v in given:
            b = given[v]
        elif v in defs:
            eq = defs[v]
            b = sum(bound(s, depth + 1) for s in eq.summands) + eq.constant
        elif v in child_of:
            b = bound(child_of[v], depth + 1)
        elif default is not None:
            b = default
        else:
            raise KeyError(f"no bound for free variable {v!r}")
        out[v] = b
        return b

    for v in system.all_vars:
        bound(v)
    for v in given:
        out.setdefault(v, given[v])
    return out


def _solve(
    rows: Sequence[tuple[dict[str, int], int]],
    literals: Sequence[Literal],
    variables: Sequence[str],
    bounds: Mapping[str, int],
    fixed: Mapping[str, int],
    max_points: int,
) -> Iterator[dict[str, int]]:
    """All valuations of ``variables`` in their boxes satisfying rows and literals.

    Backtracking over ``variables`` in the given order; an equation with a
    single unknown fixes it directly.
    """
    constraints = [(dict(c), b, True) for c, b in rows] + [(dict(l.coeffs), l.bias, l.eq) for l in literals]
    watch: dict[str, list[int]] = {}
    for i, (c, _, _) in enumerate(constraints):
        for v in c:
            watch.setdefault(v, []).append(i)
    assign: dict[str, int] = {}
    budget = [max_points]

    def consistent(i: int) -> tuple[bool, str | None, int | None]:
        """(ok, forced variable, forced value)."""
        c, b, is_eq = constraints[i]
        total = b
        unknown = None
        n_unknown = 0
        for v, k in c.items():
            if v in assign:
                total += k * assign[v]
            else:
                n_unknown += 1
                unknown = v
        if n_unknown == 0:
            return (total == 0 if is_eq else total >= 0), None, None
        if n_unknown == 1 and is_eq:
            k = c[unknown]
            if total % k:
                return False, None, None
            return True, unknown, -total // k
        return True, None, None

    def put(v: str, val: int, trail: list[str]) -> bool:
        if val < 0 or val > bounds[v]:
            return False
        assign[v] = val
        trail.append(v)
        pending = list(watch.get(v, ()))
        while pending:
            i = pending.pop()
            ok, fv, fval = consistent(i)
            if not ok:
                return False
            if fv is not None:
                if fval < 0 or fval > bounds[fv]:
                    return False
                assign[fv] = fval
                trail.append(fv)
                pending.extend(watch.get(fv, ()))
        return True

    def undo(trail: list[str]):
        for v in trail:
            del assign[v]

    def rec(k: int) -> Iterator[dict[str, int]]:
        while k < len(variables) and variables[k] in assign:
            k += 1
        if k == len(variables):
            yield dict(assign)
            return
        v = variables[k]
        for val in range(bounds[v] + 1):
            budget[0] -= 1
            if budget[0] < 0:
                raise EnumerationTooLarge(f"more than {max_points} points enumerated")
            trail: list[str] = []
            if put(v, val, trail):
                yield from rec(k + 1)
            undo(trail)

    trail: list[str] = []
    ok = True
    for v, val in fixed.items():
        if v in assign:
            ok = assign[v] == val
        else:
            ok = put(v, val, trail)
        if not ok:
            break
    if ok:
        # constraints without any variable
        ok = all(consistent(i)[0] for i, (c, _, _) in enumerate(constraints) if not c)
    if ok:
        yield from rec(0)


def integer_shadow(
    system: ReductionSystem,
    cube: Cube,
    keep: Iterable[str],
    box_bound: int | Mapping[str, int],
    max_points: int = DEFAULT_MAX_POINTS,
) -> set[tuple[int, ...]]:
    """Restrictions to ``keep`` of all integer points of ``E and cube`` in the box.

    The box is ``[0, box_bound]`` for every variable, or per variable when
    ``box_bound`` is a mapping. Points are tuples ordered by
    ``sorted(keep, key=natural_key)``.
    """
    if isinstance(box_bound, int) and box_bound < 0:
        raise ValueError("box_bound must be non-negative")
    keep = sorted(set(keep), key=natural_key)
    variables = list(dict.fromkeys(keep + list(desugar_inequalities(system).all_vars) + sorted(cube.variables, key=natural_key)))
    bounds = {v: box_bound for v in variables} if isinstance(box_bound, int) else dict(box_bound)
    missing = [v for v in variables if v not in bounds]
    if missing:
        raise ValueError(f"no box bound for {missing}")
    out = set()
    for sol in _solve(_system_rows(system), cube.split().literals, variables, bounds, {}, max_points):
        out.add(tuple(sol[v] for v in keep))
    return out


# --------------------------------------------------------------------------
# E-equivalence


@dataclass
class EquivalenceReport:
    states1: int = 0
    states2: int = 0
    bound: int = 0
    a1: list[str] = field(default_factory=list)
    a2: bool = True
    a3: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.a1 and self.a2 and not self.a3

    def __str__(self):
        if self.ok:
            return f"Ok ({self.states1} / {self.states2} reachable markings, box {self.bound})"
        lines = []
        lines += [f"(A1) {m}" for m in self.a1]
        if not self.a2:
            lines.append("(A2) initial markings are not compatible")
        lines += [f"(A3) {m}" for m in self.a3]
        return "\n".join(lines)


def related(
    system: ReductionSystem,
    m1: Mapping[str, int],
    m2: Mapping[str, int],
    box_bound: int,
    max_points: int = DEFAULT_MAX_POINTS,
) -> bool:
    """Whether ``E and m1 and m2`` has a solution in the box."""
    fixed = dict(m1)
    for p, v in m2.items():
        if fixed.setdefault(p, v) != v:
            return False
    variables = list(dict.fromkeys(list(desugar_inequalities(system).all_vars) + list(fixed)))
    bounds = {v: max(box_bound, fixed.get(v, 0)) for v in variables}
    return next(_solve(_system_rows(system), (), variables, bounds, fixed, max_points), None) is not None


def check_e_equivalence(
    n1: PetriNet,
    n2: PetriNet,
    system: ReductionSystem,
    state_cap: int = DEFAULT_STATE_CAP,
    box_bound: int | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> EquivalenceReport:
    """Check the three E-equivalence conditions by enumeration.

    (A1) every reachable marking of either net extends to a solution of E;
    (A2) the initial markings are related by E; (A3) whenever a reachable
    marking of one net is related to a marking of the other, that marking
    is reachable too. The default box is the largest total token count in
    either state space plus the largest constant of E.
    """
    r1 = reachable_markings(n1, state_cap)
    r2 = reachable_markings(n2, state_cap)
    if box_bound is None:
        box_bound = max(sum(m) for m in r1 | r2) + system.max_constant()
    report = EquivalenceReport(len(r1), len(r2), box_bound)
    rows = _system_rows(system)
    e_vars = list(desugar_inequalities(system).all_vars)

    report.a2 = related(system, n1.as_dict(n1.m0), n2.as_dict(n2.m0), box_bound, max_points)

    for src, dst, r_src, r_dst, tag in ((n1, n2, r1, r2, "N1"), (n2, n1, r2, r1, "N2")):
        other = "N2" if tag == "N1" else "N1"
        variables = list(dict.fromkeys(list(src.places) + e_vars + list(dst.places)))
        for m in sorted(r_src):
            fixed = src.as_dict(m)
            bounds = {v: max(box_bound, fixed.get(v, 0)) for v in variables}
            images = set()
            for sol in _solve(rows, (), variables, bounds, fixed, max_points):
                images.add(tuple(sol[p] for p in dst.places))
            if not images:
                report.a1.append(f"reachable marking {fixed} of {tag} has no solution in E")
            for img in sorted(images):
                if img not in r_dst:
                    report.a3.append(
                        f"{tag} marking {fixed} is reachable and related to unreachable "
                        f"{other} marking {dst.as_dict(img)}"
                    )
    return report
