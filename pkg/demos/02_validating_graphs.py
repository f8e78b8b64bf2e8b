"""What a malformed token flow graph looks like.

Every equation becomes a group of arcs. Redundancies point from the
summands to the defined place; agglomerations point from the new place to
the places it replaces. Four rules keep the graph usable: constants are
roots (T1), each place is removed once (T2), arcs and equations match (T3),
and the graph is acyclic with exactly the reduced-net places as roots (T4).
"""

from pathlib import Path

import polyproj
from polyproj.tfg import AGG, RED, to_dot

DATA = Path(polyproj.__file__).parent / "data"
system = polyproj.parse_equation_file((DATA / "memory.eq").read_text())
g = polyproj.infer_tfg(system)

print("inferred reduced places:", sorted(g.p2))
print(to_dot(g))


def show(title, graph):
    print(f"-- {title}")
    for v in polyproj.validate(graph) or ["Ok"]:
        print("  ", v)


show("as built", g)

constant = next(n.id for n in g.nodes if n.is_constant)
show("arc into the constant 4096", g.with_arc("p0", constant, RED))
show("a2 also agglomerates p7", g.with_arc("a2", "p7", AGG))
show("p7 feeds a2, closing a loop", g.with_arc("p7", "a2", RED))
show("p4 dropped from the reduced net", g.with_places(p2=g.p2 - {"p4"}))

# Problems caught while parsing are reported with their line number.
try:
    polyproj.parse_equation_file("# R |- p1 = p4 + 4096\n# R |- p1 = p5\n")
except polyproj.ParseError as e:
    print("parse error:", e)

# Inequalities get slack variables; the slack becomes an extra root that
# the schedule eliminates last.
ineq = polyproj.parse_equation_file("# R |- total >= used + 1\n")
print(polyproj.desugar_inequalities(ineq).equations)
g2 = polyproj.infer_tfg(ineq)
print(polyproj.elimination_schedule(g2))
