"""Checking a projection against two small nets.

N1 moves tokens p -> q -> r. Reducing it merges p and q into a single place
a, giving N2 with a -> r. Because the nets are small, we can enumerate both
state spaces, confirm that the equation relates them, and compare the
verdict of each query on N1 with the verdict of its projection on N2.
"""

import polyproj
from polyproj.petri import reachable_markings

n1 = polyproj.parse_net("pl p (3)\ntr t1 p -> q\ntr t2 q -> r\n")
n2 = polyproj.parse_net("pl a (3)\ntr t a -> r\n")
system = polyproj.parse_equation_file("# A |- a = p + q\n")

print("N1 markings:", sorted(reachable_markings(n1)))
print("N2 markings:", sorted(reachable_markings(n2)))
print("related by the equation:", polyproj.check_e_equivalence(n1, n2, system))

# A wrong equation is caught by the same check.
wrong = polyproj.parse_equation_file("# A |- a = p + r\n")
print("wrong equation ok?", polyproj.check_e_equivalence(n1, n2, wrong).ok)

g = polyproj.build_tfg(system, n1.places, n2.places)
schedule = polyproj.elimination_schedule(g)

for text in ["EF q >= 2 and r >= 1", "EF p = q", "EF p >= 1 and q >= 1 and r >= 2", "EF q >= 4"]:
    query = polyproj.parse_query(text)
    result = polyproj.project_query(g, schedule, query)
    v1 = polyproj.check_reachable(n1, polyproj.to_dnf(query.body))
    v2 = polyproj.check_reachable(n2, result.formula)
    print(f"{text:36} -> {result.query:28} [{result.label}]")
    print(f"    N1: {v1}\n    N2: {v2}")

# An under-approximation only keeps witnesses that surely transfer: "p = q"
# becomes "a <= 0", which stands for the single N1 witness p = q = 0. N1 has
# other witnesses (p = q = 1) that the projection cannot see, so an
# unreachable verdict on N2 would prove nothing here.

# Random walks are an inexpensive way to look for witnesses on bigger nets.
walk = polyproj.random_walk(n1, polyproj.to_dnf(polyproj.parse_formula("r >= 3")), max_steps=50, seed=1)
print("random walk:", walk)
