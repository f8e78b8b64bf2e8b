"""Token flow graphs.

One node per variable of a reduction system and one constant node per
equation constant. A redundancy ``p = x1 + ... + xk + c`` yields arcs
``xi ->. p`` (and ``K(c) ->. p``); an agglomeration ``a = x1 + ... + xk``
yields arcs ``a o-> xi``.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Union

from .errors import ProgressFailure, UnknownNode
from .linalg import natural_key
from .redsys import Equation, Kind, ReductionSystem, desugar_inequalities

RED = "red"
AGG = "agg"


@dataclass(frozen=True)
class Node:
    id: int
    name: str | None = None
    value: int | None = None

    @property
    def is_constant(self) -> bool:
        return self.value is not None

    @property
    def label(self) -> str:
        return self.name if self.name is not None else f"K({self.value})"


@dataclass(frozen=True)
class Red:
    """Substitute ``target`` by ``sum(sources) + constant``."""

    target: str
    sources: tuple[str, ...]
    constant: int = 0

    @property
    def removed(self) -> tuple[str, ...]:
        return (self.target,)


@dataclass(frozen=True)
class Agg:
    """Eliminate ``targets`` in favour of the agglomerated ``source``."""

    source: str
    targets: tuple[str, ...]

    @property
    def removed(self) -> tuple[str, ...]:
        return self.targets


@dataclass(frozen=True)
class Slack:
    """Eliminate a slack variable introduced for an inequality."""

    var: str

    @property
    def removed(self) -> tuple[str, ...]:
        return (self.var,)


EliminationStep = Union[Red, Agg, Slack]


@dataclass(frozen=True)
class Violation:
    rule: str
    nodes: tuple[str, ...]
    message: str

    def __str__(self):
        return f"{self.rule}: {self.message} [{', '.join(self.nodes)}]"


@dataclass(frozen=True, eq=False)
class TokenFlowGraph:
    nodes: tuple[Node, ...]
    red_arcs: frozenset[tuple[int, int]]
    agg_arcs: frozenset[tuple[int, int]]
    p1: frozenset[str]
    p2: frozenset[str]
    equations: tuple[Equation, ...] = ()
    slack: frozenset[str] = frozenset()
    constant_of: dict[int, int] = field(default_factory=dict)  # equation index -> constant node
    arc_origin: dict[tuple[str, int, int], tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        index = {n.name: n.id for n in self.nodes if n.name is not None}
        children: dict[int, set[int]] = {n.id: set() for n in self.nodes}
        parents: dict[int, set[int]] = {n.id: set() for n in self.nodes}
        for src, dst in self.red_arcs | self.agg_arcs:
            children[src].add(dst)
            parents[dst].add(src)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_children", children)
        object.__setattr__(self, "_parents", parents)

    # lookups

    def node_id(self, node: str | int) -> int:
        if isinstance(node, int):
            if 0 <= node < len(self.nodes):
                return node
            raise UnknownNode(f"no node with id {node}")
        try:
            return self._index[node]
        except KeyError:
            raise UnknownNode(f"no node named {node!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def label(self, node_id: int) -> str:
        return self.nodes[node_id].label

    def order(self, name: str) -> int:
        return self._index[name]

    @property
    def places(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.name is not None)

    def children(self, node: str | int) -> frozenset[int]:
        return frozenset(self._children[self.node_id(node)])

    def parents(self, node: str | int) -> frozenset[int]:
        return frozenset(self._parents[self.node_id(node)])

    def roots(self) -> list[int]:
        return [n.id for n in self.nodes if not self._parents[n.id]]

    def with_arc(self, src: str | int, dst: str | int, kind: str = RED) -> "TokenFlowGraph":
        """Copy of the graph with one extra arc not backed by any equation."""
        arc = (self.node_id(src), self.node_id(dst))
        red, agg = self.red_arcs, self.agg_arcs
        if kind == RED:
            red = red | {arc}
        elif kind == AGG:
            agg = agg | {arc}
        else:
            raise ValueError(f"unknown arc kind {kind!r}")
        return TokenFlowGraph(
            self.nodes, red, agg, self.p1, self.p2, self.equations, self.slack,
            self.constant_of, self.arc_origin,
        )

    def with_places(self, p1: Iterable[str] | None = None, p2: Iterable[str] | None = None) -> "TokenFlowGraph":
        return TokenFlowGraph(
            self.nodes, self.red_arcs, self.agg_arcs,
            frozenset(self.p1 if p1 is None else p1), frozenset(self.p2 if p2 is None else p2),
            self.equations, self.slack, self.constant_of, self.arc_origin,
        )


def build_tfg(system: ReductionSystem, p1: Iterable[str] = (), p2: Iterable[str] = ()) -> TokenFlowGraph:
    """Token flow graph of ``system`` (inequalities are desugared first)."""
    system = desugar_inequalities(system)
    p1, p2 = frozenset(p1), frozenset(p2)
    names = list(system.all_vars)
    known = set(names)
    for extra in sorted(p1 | p2, key=natural_key):
        if extra not in known:
            names.append(extra)
            known.add(extra)
    nodes = [Node(i, name=n) for i, n in enumerate(names)]
    index = {n: i for i, n in enumerate(names)}

    red: set[tuple[int, int]] = set()
    agg: set[tuple[int, int]] = set()
    origin: dict[tuple[str, int, int], tuple[int, ...]] = {}
    constant_of: dict[int, int] = {}

    def add(kind: str, arcs: set, src: int, dst: int, eq_index: int):
        arcs.add((src, dst))
        origin[(kind, src, dst)] = origin.get((kind, src, dst), ()) + (eq_index,)

    for i, eq in enumerate(system.equations):
        v = index[eq.defined]
        if eq.kind is Kind.REDUNDANCY:
            for s in eq.summands:
                add(RED, red, index[s], v, i)
            if eq.constant > 0:
                k = Node(len(nodes), value=eq.constant)
                nodes.append(k)
                constant_of[i] = k.id
                add(RED, red, k.id, v, i)
        else:
            for s in eq.summands:
                add(AGG, agg, v, index[s], i)

    return TokenFlowGraph(
        tuple(nodes), frozenset(red), frozenset(agg), p1, p2,
        system.equations, system.slack_vars, constant_of, origin,
    )


def infer_tfg(system: ReductionSystem, extra: Iterable[str] = ()) -> TokenFlowGraph:
    """Token flow graph when the nets themselves are not at hand.

    The initial places are the variables of ``system`` plus ``extra`` (say,
    the variables of a query); the reduced places are the roots of the
    graph that are neither constants nor slack variables.
    """
    p1 = set(system.all_vars) | set(extra)
    g = build_tfg(system, p1=p1)
    p2 = {g.nodes[r].name for r in g.roots() if g.nodes[r].name is not None} - g.slack
    return g.with_places(p2=p2)


def successors(g: TokenFlowGraph, node: str | int | Iterable[str | int]) -> frozenset[str]:
    """Labels of the nodes reachable from ``node`` by a non-empty path, excluding ``node``.

    For a collection of nodes this is the union of their successor sets.
    """
    if not isinstance(node, (str, int)):
        out: frozenset[str] = frozenset()
        for n in node:
            out |= successors(g, n)
        return out
    start = g.node_id(node)
    seen: set[int] = set()
    stack = list(g._children[start])
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(g._children[v])
    seen.discard(start)
    return frozenset(g.label(v) for v in seen)


def _cycles(g: TokenFlowGraph) -> list[list[int]]:
    """Strongly connected components that contain a cycle (Tarjan, iterative)."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(len(g.nodes)):
        if root in index:
            continue
        work = [(root, iter(sorted(g._children[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(g._children[w]))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1 or v in g._children[v]:
                    out.append(sorted(comp))
    return out


def validate(g: TokenFlowGraph) -> list[Violation]:
    """All well-formedness violations (T1 to T4); an empty list means Ok."""
    out: list[Violation] = []
    lab = g.label

    # T1: constants are roots
    for n in g.nodes:
        if n.is_constant and g._parents[n.id]:
            out.append(Violation("T1", (n.label,) + tuple(lab(p) for p in sorted(g._parents[n.id])),
                                 f"constant {n.label} has a parent"))

    # T2: nodes are removed only once
    t2: dict[int, list[str]] = {}
    for src, dst in sorted(g.red_arcs & g.agg_arcs):
        t2.setdefault(dst, []).append(f"both arc kinds from {lab(src)}")
    for src, dst in sorted(g.agg_arcs):
        others = g._parents[dst] - {src}
        if others:
            t2.setdefault(dst, []).append(
                f"agglomerated from {lab(src)} but also has parents {', '.join(lab(o) for o in sorted(others))}"
            )
    removers: dict[int, list[int]] = {}
    for i, eq in enumerate(g.equations):
        for v in eq.removed():
            removers.setdefault(g.node_id(v), []).append(i)
    for v, eqs in removers.items():
        if len(eqs) > 1:
            t2.setdefault(v, []).append(f"removed by {len(eqs)} equations")
    for v in sorted(t2):
        out.append(Violation("T2", (lab(v),), f"{lab(v)} removed more than once: " + "; ".join(t2[v])))

    # T3: arcs correspond one-to-one with equations
    for kind, arcs in ((RED, g.red_arcs), (AGG, g.agg_arcs)):
        for src, dst in sorted(arcs):
            if not g.arc_origin.get((kind, src, dst)):
                sym = "->." if kind == RED else "o->"
                out.append(Violation("T3", (lab(src), lab(dst)),
                                     f"arc {lab(src)} {sym} {lab(dst)} has no equation"))
    red_in: dict[int, set[int]] = {}
    agg_out: dict[int, set[int]] = {}
    for s, d in g.red_arcs:
        red_in.setdefault(d, set()).add(s)
    for s, d in g.agg_arcs:
        agg_out.setdefault(s, set()).add(d)
    for i, eq in enumerate(g.equations):
        v = g.node_id(eq.defined)
        if eq.kind is Kind.REDUNDANCY:
            group = red_in.get(v, set())
            expected = {g.node_id(s) for s in eq.summands}
            if i in g.constant_of:
                expected.add(g.constant_of[i])
        else:
            group = agg_out.get(v, set())
            expected = {g.node_id(s) for s in eq.summands}
        if group != expected:
            out.append(Violation("T3", (eq.defined,),
                                 f"arcs at {eq.defined} do not match equation '{eq}'"))

    # T4: acyclic, and non-constant roots are exactly the kept places
    for comp in _cycles(g):
        out.append(Violation("T4", tuple(lab(v) for v in comp), "cycle"))
    roots = {g.nodes[r].name for r in g.roots() if not g.nodes[r].is_constant}
    for name in sorted(roots - g.p2 - g.slack, key=natural_key):
        out.append(Violation("T4", (name,), f"root {name} is not a place of the reduced net"))
    for name in sorted(g.p2 - roots, key=natural_key):
        out.append(Violation("T4", (name,), f"reduced-net place {name} is not a root"))
    for name in sorted(g.p2 & g.slack, key=natural_key):
        out.append(Violation("T4", (name,), f"slack variable {name} declared as a reduced-net place"))
    return out


def elimination_schedule(g: TokenFlowGraph) -> list[EliminationStep]:
    """Bottom-up order of elimination steps removing every node outside ``p2``.

    A group (the target of a redundancy, the targets of an agglomeration, or
    a slack root) becomes available once none of its nodes has a child left;
    among available groups the one with the lowest node index goes first.
    """
    keep = {g.node_id(p) for p in g.p2 if p in g}
    places = [n.id for n in g.nodes if not n.is_constant]

    members: list[tuple[int, ...]] = []
    steps: list[EliminationStep] = []
    group_of: dict[int, int] = {}
    for i, eq in enumerate(g.equations):
        if eq.kind is Kind.REDUNDANCY:
            ids = (g.node_id(eq.defined),)
            steps.append(Red(eq.defined, eq.summands, eq.constant))
        else:
            ids = tuple(g.node_id(s) for s in eq.summands)
            steps.append(Agg(eq.defined, eq.summands))
        members.append(ids)
        for v in ids:
            group_of.setdefault(v, len(members) - 1)
    for name in sorted(g.slack, key=natural_key):
        v = g.node_id(name)
        if v not in group_of and not g._parents[v]:
            members.append((v,))
            steps.append(Slack(name))
            group_of[v] = len(members) - 1

    pending = {v: sum(1 for c in g._children[v] if not g.nodes[c].is_constant) for v in places}
    ready = [0] * len(members)
    done = [False] * len(members)
    alive = set(places)
    heap: list[tuple[int, int]] = []

    def mark_leaf(v: int):
        grp = group_of.get(v)
        if grp is None:
            return
        ready[grp] += 1
        if ready[grp] == len(members[grp]):
            heapq.heappush(heap, (min(members[grp]), grp))

    for v in places:
        if v not in keep and pending[v] == 0:
            mark_leaf(v)

    schedule: list[EliminationStep] = []
    while heap:
        _, grp = heapq.heappop(heap)
        if done[grp]:
            continue
        done[grp] = True
        schedule.append(steps[grp])
        for v in members[grp]:
            alive.discard(v)
        for v in members[grp]:
            for p in g._parents[v]:
                if p in alive:
                    pending[p] -= 1
                    if pending[p] == 0 and p not in keep:
                        mark_leaf(p)

    stuck = sorted(alive - keep)
    if stuck:
        raise ProgressFailure(
            "no elimination step applies to " + ", ".join(g.label(v) for v in stuck)
        )
    return schedule


def to_dot(g: TokenFlowGraph) -> str:
    """Graphviz rendering: solid arrows for redundancy, open-dot tails for agglomeration."""
    lines = ["digraph tfg {"]
    for n in g.nodes:
        shape = "box" if n.is_constant else ("doublecircle" if n.name in g.p2 else "circle")
        lines.append(f'  n{n.id} [label="{n.label}", shape={shape}];')
    for src, dst in sorted(g.red_arcs):
        lines.append(f"  n{src} -> n{dst} [arrowhead=dot];")
    for src, dst in sorted(g.agg_arcs):
        lines.append(f"  n{src} -> n{dst} [arrowtail=odot, dir=both];")
    lines.append("}")
    return "\n".join(lines) + "\n"
