"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the session (and immediately with ``-s``).
"""

import itertools
import random
import time
from pathlib import Path

from nets import FIXTURES
from oracle import box_points, compare, random_cube, random_system
from polyproj import cli
from polyproj.linalg import Cube, DnfFormula, Literal, parse_formula, parse_query, to_dnf
from polyproj.petri import check_e_equivalence, check_reachable, integer_shadow, parse_net, propagated_bounds
from polyproj.projector import Direction, project_cube, project_query
from polyproj.redsys import parse_equation_file
from polyproj.tfg import AGG, RED, build_tfg, elimination_schedule, infer_tfg, successors, validate

DATA = Path(cli.__file__).parent / "data"
MEMORY = (DATA / "memory.eq").read_text()
P1 = [f"p{i}" for i in range(9)]
P2 = ["p0", "p2", "p3", "p4", "a2"]
KEEP = sorted(P2)  # a2, p0, p2, p3, p4

RESULTS: dict[int, tuple[bool, str]] = {}


def report(number: int, ok: bool, detail: str):
    RESULTS[number] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def memory_graph():
    g = build_tfg(parse_equation_file(MEMORY), P1, P2)
    return g, elimination_schedule(g)


def solutions(formula_text: str, box: int):
    return box_points(to_dnf(parse_formula(formula_text)), KEEP, box)


def projected_points(result, box):
    return box_points(result.formula, KEEP, box)


# 1 -------------------------------------------------------------------------


def test_criterion_1_bounded_exact():
    start = time.monotonic()
    g, schedule = memory_graph()
    result = project_query(g, schedule, parse_query("EF p5 + p6 <= p8"))
    elapsed = time.monotonic() - start
    got = projected_points(result, 6)
    want = solutions("p0 + p2 + p3 <= a2", 6)
    # the brute-force shadow agrees as well
    system = parse_equation_file(MEMORY)
    (c,) = to_dnf(parse_formula("p5 + p6 <= p8")).cubes
    shadow = integer_shadow(system, c, KEEP, propagated_bounds(system, dict.fromkeys(KEEP, 6)))
    ok = got == want == shadow and result.exact and elapsed < 1.0
    report(1, ok, f"EF p5 + p6 <= p8 -> '{result.query}' [{result.label}], {len(got)} points in [0,6]^5 "
                  f"equal reference and shadow: {got == want == shadow}, {elapsed * 1000:.1f} ms")


# 2 -------------------------------------------------------------------------


def test_criterion_2_balance_under():
    g, schedule = memory_graph()
    result = project_query(g, schedule, parse_query("EF p6 = p8"))
    same = projected_points(result, 6) == solutions("a2 + p0 + p2 + p3 = 0", 6)
    system = parse_equation_file(MEMORY)
    (c,) = to_dnf(parse_formula("p6 = p8")).cubes
    shadow = integer_shadow(system, c, KEEP, propagated_bounds(system, dict.fromkeys(KEEP, 4)))
    proj4 = projected_points(result, 4)
    parity = tuple(2 if v == "a2" else 0 for v in KEEP)
    ok = (
        same
        and result.approximation is Direction.UNDER
        and proj4 < shadow
        and parity in shadow
        and parity not in proj4
    )
    report(2, ok, f"EF p6 = p8 -> '{result.query}' [{result.label}]; projection {len(proj4)} points "
                  f"strictly inside shadow of {len(shadow)} on [0,4]; (a2=2, rest 0) in shadow only: "
                  f"{parity in shadow and parity not in proj4}")


# 3 -------------------------------------------------------------------------


def test_criterion_3_random_soundness():
    rng = random.Random(20240611)
    start = time.monotonic()
    systems = 0
    runs = violations = exact = 0
    for _ in range(250):
        system = random_system(rng, max_nodes=8, max_equations=4)
        systems += 1
        places = sorted(infer_tfg(system).places)
        for _ in range(2):
            c = random_cube(rng, places, max_literals=4)
            for direction in Direction:
                is_exact, projected, shadow = compare(system, c, direction, 5)
                runs += 1
                exact += is_exact
                if is_exact:
                    bad = projected != shadow
                elif direction is Direction.UNDER:
                    bad = not projected <= shadow
                else:
                    bad = not projected >= shadow
                violations += bad
    elapsed = time.monotonic() - start
    ok = systems >= 200 and violations == 0 and elapsed < 300
    report(3, ok, f"{systems} random TFGs, {runs} projections ({exact} exact), "
                  f"{violations} violations, {elapsed:.1f} s")


# 4 -------------------------------------------------------------------------


def random_query(rng, places):
    cubes = []
    for _ in range(rng.randint(1, 2)):
        lits = []
        for _ in range(rng.randint(1, 3)):
            vs = rng.sample(places, rng.randint(1, min(2, len(places))))
            lits.append(Literal({v: rng.randint(-2, 2) for v in vs}, rng.randint(-3, 3), eq=rng.random() < 0.2))
        cubes.append(Cube(tuple(lits)))
    return DnfFormula(tuple(cubes))


def test_criterion_4_witness_transfer():
    rng = random.Random(7)
    fixtures = queries = violations = transferred = exact_unreach = 0
    for name, a, b, e in FIXTURES:
        n1, n2, system = parse_net(a), parse_net(b), parse_equation_file(e)
        assert check_e_equivalence(n1, n2, system).ok, name
        g = build_tfg(system, n1.places, n2.places)
        assert validate(g) == [], name
        schedule = elimination_schedule(g)
        fixtures += 1
        for _ in range(60):
            f1 = random_query(rng, list(n1.places))
            cubes, exact = [], True
            for c in f1.cubes:
                res = project_cube(g, schedule, c, Direction.UNDER)
                exact &= res.exact
                if isinstance(res.result, Cube):
                    cubes.append(res.result)
                elif res.result.value == "taut":
                    cubes.append(Cube())
            f2 = DnfFormula(tuple(cubes))
            v1 = check_reachable(n1, f1, 10_000)
            v2 = check_reachable(n2, f2, 10_000)
            assert "inconclusive" not in (v1.verdict, v2.verdict)
            queries += 1
            if v2.reachable:
                transferred += v1.reachable
                violations += not v1.reachable
            elif exact:
                exact_unreach += 1
                violations += v1.reachable
    ok = fixtures >= 20 and queries >= 50 * fixtures and violations == 0
    report(4, ok, f"{fixtures} fixtures, {queries} EF queries: {transferred} witnesses transferred, "
                  f"{exact_unreach} exact unreachable verdicts matched, {violations} violations")


# 5 -------------------------------------------------------------------------


def test_criterion_5_linear_chain():
    n = 10_000
    lines = [f"# A |- a{i + 1} = a{i} + b{i}" for i in range(n)]
    system = parse_equation_file("\n".join(lines))
    g = infer_tfg(system)
    schedule = elimination_schedule(g)
    rng = random.Random(5)
    lits = []
    for j in range(50):
        coeffs = {"a0": rng.randint(-3, 3), f"b{j}": rng.randint(-3, 3) or 1, f"b{rng.randrange(n)}": rng.randint(-3, 3)}
        lits.append(Literal(coeffs, rng.randint(-5, 5)))
    c = Cube(tuple(lits))
    sizes = []
    start = time.monotonic()
    res = project_cube(g, schedule, c, on_step=lambda step, k: sizes.append(k))
    elapsed = time.monotonic() - start
    ok = elapsed < 1.0 and res.counts.steps == n and len(sizes) == n and max(sizes) <= 50
    report(5, ok, f"{n} agglomerations, 50-literal cube: {res.counts.steps} steps, "
                  f"max {max(sizes)} literals per step, {elapsed * 1000:.0f} ms")


# 6 -------------------------------------------------------------------------


def test_criterion_6_stats(capsys):
    def once():
        code = cli.main(["stats", "--equations", str(DATA / "memory.eq"), "--query", str(DATA / "queries")])
        out = capsys.readouterr().out
        assert code == 0
        return [" ".join(f for f in line.split() if not f.startswith("wall_ms=")) for line in out.splitlines()]

    first, second = once(), once()
    records = {line.split()[0]: line for line in first if line.startswith("query=")}
    summary = first[-1]
    ok = (
        first == second
        and "exactness=exact" in records["query=ef_bounded.q"]
        and "exactness=exact" not in records["query=ef_balance.q"]
        and "exact_rate=" in summary
        and "median_literal_ratio=" in summary
    )
    report(6, ok, f"{len(records)} queries, deterministic: {first == second}; {summary}")


# 7 -------------------------------------------------------------------------


def t_labels(g):
    return {v.rule for v in validate(g)}


def test_criterion_7_validation():
    g, _ = memory_graph()
    base_ok = validate(g) == []
    names = list(g.places)
    consts = [n.id for n in g.nodes if n.is_constant]
    cases = missed = 0

    def expect(mutant, rule, where=None):
        nonlocal cases, missed
        cases += 1
        found = [v for v in validate(mutant) if v.rule == rule and (where is None or where in v.nodes)]
        missed += not found

    # T1: any arc into a constant
    for k, src, kind in itertools.product(consts, names, (RED, AGG)):
        expect(g.with_arc(src, k, kind), "T1")
    # T2 double removal: a second agglomeration arc into an already removed node
    removed = {v for eq in g.equations for v in eq.removed()}
    for x in sorted(removed):
        for b in names:
            if b != x and (g.node_id(b), g.node_id(x)) not in g.agg_arcs:
                expect(g.with_arc(b, x, AGG), "T2", x)
    # T2 both kinds on one pair
    for s, d in sorted(g.red_arcs):
        if not g.nodes[s].is_constant:
            expect(g.with_arc(s, d, AGG), "T2", g.label(d))
    for s, d in sorted(g.agg_arcs):
        expect(g.with_arc(s, d, RED), "T2", g.label(d))
    # T4 cycles: close every path
    for u in names:
        for v in sorted(successors(g, u)):
            if v in g:
                expect(g.with_arc(v, u, RED), "T4")
    # T4 root mismatch
    for p in P2:
        expect(g.with_places(p2=set(P2) - {p}), "T4", p)
    for p in names:
        if p not in P2:
            expect(g.with_places(p2=set(P2) | {p}), "T4", p)
    ok = base_ok and missed == 0
    report(7, ok, f"memory system valid: {base_ok}; {cases} mutants over 4 classes, {missed} missed")
