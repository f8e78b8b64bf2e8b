import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyproj.errors import DuplicateDefinition, ParseError, UnknownEquationKind, UnsupportedInequality
from polyproj.redsys import (
    Equation,
    Kind,
    ReductionSystem,
    desugar_inequalities,
    format_system,
    parse_equation,
    parse_equation_file,
)

MEMORY = """\
# R |- p1 = p4 + 4096
# R |- p6 = p0 + p2 + p3 + p5 + p7
# A |- a1 = p7 + p8
# A |- a2 = a1 + p5
"""


def test_agglomeration_line():
    eq = parse_equation("# A |- a1 = p7 + p8")
    assert (eq.kind, eq.defined, eq.summands, eq.constant) == (Kind.AGGLOMERATION, "a1", ("p7", "p8"), 0)


def test_redundancy_with_constant():
    eq = parse_equation("# R |- p1 = p4 + 4096")
    assert (eq.kind, eq.defined, eq.summands, eq.constant) == (Kind.REDUNDANCY, "p1", ("p4",), 4096)


def test_self_reference_rejected():
    with pytest.raises(ParseError):
        parse_equation("# R |- p = p")


@pytest.mark.parametrize(
    "line",
    [
        "R |- p = q",
        "# R |- p = q + q",
        "# A |- a = p + 2",
        "# R |- p = 3",
        "# R |- 2 = p",
        "# R |- p = q - r",
        "# R |- p == q",
    ],
)
def test_malformed(line):
    with pytest.raises(ParseError):
        parse_equation(line)


def test_unknown_kind():
    with pytest.raises(UnknownEquationKind):
        parse_equation("# X |- p = q")


def test_file_comments_and_duplicates():
    system = parse_equation_file("# reduced by hand\n\n" + MEMORY)
    assert len(system) == 4
    assert system.all_vars[:3] == ("p1", "p4", "p6")
    with pytest.raises(DuplicateDefinition) as info:
        parse_equation_file("# R |- p = q\n# A |- p = r + s\n")
    assert info.value.line == 2


def test_forward_references_allowed():
    system = parse_equation_file("# A |- a2 = a1 + p5\n# A |- a1 = p7 + p8\n")
    assert system.defining("a1").summands == ("p7", "p8")


def test_desugar_ge():
    out = desugar_inequalities(parse_equation_file("# R |- p >= q + r"))
    (eq,) = out.equations
    assert (eq.defined, eq.summands, eq.relation) == ("p", ("q", "r", "_s0"), "=")
    assert out.slack_vars == {"_s0"}


def test_desugar_le_reorients():
    out = desugar_inequalities(parse_equation_file("# R |- p <= q"))
    (eq,) = out.equations
    assert (eq.defined, eq.summands) == ("q", ("p", "_s0"))
    # same (p, q) solutions once the slack is projected away
    before = {(p, q) for p, q in itertools.product(range(5), repeat=2) if p <= q}
    after = {(p, q) for p, q, s in itertools.product(range(5), repeat=3) if q == p + s}
    assert before == after


def test_desugar_le_unsupported():
    with pytest.raises(UnsupportedInequality):
        desugar_inequalities(parse_equation_file("# R |- p <= q + r"))
    with pytest.raises(UnsupportedInequality):
        desugar_inequalities(parse_equation_file("# R |- q = r\n# R |- p <= q"))


def test_desugar_noop():
    system = parse_equation_file(MEMORY)
    assert desugar_inequalities(system) is system
    assert system.slack_vars == frozenset()


def test_slack_names_avoid_collisions():
    out = desugar_inequalities(parse_equation_file("# R |- _s0 = a\n# R |- p >= q"))
    assert out.slack_vars == {"_s1"}


# --- properties ----------------------------------------------------------

NAMES = ["p", "q", "r", "s", "t"]


@st.composite
def systems(draw):
    eqs = []
    defined = set()
    for _ in range(draw(st.integers(0, 4))):
        v = draw(st.sampled_from(NAMES).filter(lambda n: n not in defined))
        others = [n for n in NAMES if n != v]
        summands = draw(st.lists(st.sampled_from(others), min_size=1, max_size=3, unique=True))
        kind = draw(st.sampled_from(Kind))
        c = 0 if kind is Kind.AGGLOMERATION else draw(st.integers(0, 9))
        rel = "=" if kind is Kind.AGGLOMERATION else draw(st.sampled_from(["=", "=", ">="]))
        eqs.append(Equation(kind, v, tuple(summands), c, rel))
        defined.add(v)
    return ReductionSystem(tuple(eqs))


@given(systems())
def test_round_trip(system):
    assert parse_equation_file(format_system(system)) == system


@given(systems())
def test_desugar_preserves_solutions(system):
    """Dropping the slacks of the desugared system recovers the original solutions."""
    if len(system.all_vars) > 4:
        return
    out = desugar_inequalities(system)
    xs = list(system.all_vars)
    slacks = sorted(out.slack_vars)
    box = range(4)

    def holds(eqs, m):
        for eq in eqs:
            rhs = sum(m[s] for s in eq.summands) + eq.constant
            ok = {"=": m[eq.defined] == rhs, ">=": m[eq.defined] >= rhs, "<=": m[eq.defined] <= rhs}
            if not ok[eq.relation]:
                return False
        return True

    before = {p for p in itertools.product(box, repeat=len(xs)) if holds(system.equations, dict(zip(xs, p)))}
    after = set()
    slack_box = range(4 + 3 * 4 + 9)
    for p in itertools.product(box, repeat=len(xs)):
        m = dict(zip(xs, p))
        for s in itertools.product(slack_box, repeat=len(slacks)) if slacks else [()]:
            if holds(out.equations, {**m, **dict(zip(slacks, s))}):
                after.add(p)
                break
    assert before == after
