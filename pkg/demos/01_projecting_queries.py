"""Projecting queries through a reduction, step by step.

The system below comes from a small memory-allocation model: p1 counts free
segments and always holds 4096 more tokens than p4; p6 is the sum of five
other places; a1 and a2 collect the tokens of places that the reduced net
no longer has. We project a few queries onto the places that survive.
"""

from pathlib import Path

import polyproj
from polyproj.projector import format_projection

DATA = Path(polyproj.__file__).parent / "data"

system = polyproj.parse_equation_file((DATA / "memory.eq").read_text())
for eq in system:
    print(eq)

# Initial places p0..p8; the reduced net keeps p0, p2, p3, p4 and the new a2.
g = polyproj.build_tfg(system, p1=[f"p{i}" for i in range(9)], p2=["p0", "p2", "p3", "p4", "a2"])
print("well formed:", polyproj.validate(g) == [])

# The schedule removes nodes bottom-up: redundancies first, then the two
# agglomerations (a1 before a2, since a2 covers a1).
schedule = polyproj.elimination_schedule(g)
for step in schedule:
    print("  ", step)

# An inequality projects exactly: after substituting p6, the agglomerated
# places always have one variable with the highest coefficient.
result = polyproj.project_query(g, schedule, polyproj.parse_query("EF p5 + p6 <= p8"))
print(format_projection(result))

# An equality does not: p7 and p8 pull in opposite directions in the two
# halves of "p6 = p8". The result keeps only witnesses that surely exist.
result = polyproj.project_query(g, schedule, polyproj.parse_query("EF p6 = p8"))
print(format_projection(result))

# Asking for the opposite direction gives a formula that every real witness
# satisfies, at the cost of possibly accepting spurious ones.
result = polyproj.project_query(g, schedule, polyproj.parse_query("EF p6 = p8"), polyproj.Direction.OVER)
print(format_projection(result))

# Invariants are projected through their negation.
result = polyproj.project_query(g, schedule, polyproj.parse_query("AG p6 = p8"))
print(format_projection(result))

# The cube-level API exposes each step; here we watch the literal count.
(cube,) = polyproj.to_dnf(polyproj.parse_formula("p6 >= 1 and p8 <= p5 + 2")).cubes
res = polyproj.project_cube(g, schedule, cube, on_step=lambda step, n: print(f"  after {step}: {n} literals"))
print("result:", res.result, "| exact:", res.exact)
