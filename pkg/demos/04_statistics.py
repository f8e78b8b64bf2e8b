"""Projection statistics over a directory of queries.

The command-line ``stats`` subcommand projects every file in a directory
and prints one record per query followed by a summary line. The literal
ratio is the fraction of literals removed by the projection.
"""

from pathlib import Path

import polyproj
from polyproj import cli

DATA = Path(polyproj.__file__).parent / "data"

for path in sorted((DATA / "queries").iterdir()):
    print(f"{path.name:20} {path.read_text().strip()}")
print()

cli.main(["stats", "--equations", str(DATA / "memory.eq"), "--query", str(DATA / "queries")])

# The same numbers are available from the library directly.
system = polyproj.parse_equation_file((DATA / "memory.eq").read_text())
g = polyproj.infer_tfg(system)
schedule = polyproj.elimination_schedule(g)
exact = 0
files = sorted((DATA / "queries").iterdir())
for path in files:
    exact += polyproj.project_query(g, schedule, polyproj.parse_query(path.read_text())).exact
print(f"\n{exact} of {len(files)} projections are exact")
