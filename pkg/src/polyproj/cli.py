"""Command-line front end.

Subcommands::

    polyproj project  --equations E --query Q [--direction under|over] [--cube-cap N] [-o OUT]
    polyproj check    --equations E --query Q --net1 N1 --net2 N2 [--state-cap N] [--box N]
    polyproj validate --equations E
    polyproj stats    --equations E --query DIR [-o OUT]

Exit codes: 0 success, 1 check failed, 2 parse or validation error,
3 DNF blow-up, 4 inconclusive (state cap or enumeration guard hit).
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    CapExceeded,
    DnfBlowup,
    EnumerationTooLarge,
    ParseError,
    PolyprojError,
)
from .linalg import DEFAULT_CUBE_CAP, QueryFormula, parse_query, to_dnf, tree_variables
from .petri import DEFAULT_STATE_CAP, PetriNet, check_e_equivalence, check_reachable, parse_net
from .projector import Direction, ProjectionResult, format_projection, project_query
from .redsys import ReductionSystem, parse_equation_file
from .tfg import TokenFlowGraph, build_tfg, elimination_schedule, infer_tfg, validate

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_BLOWUP = 3
EXIT_INCONCLUSIVE = 4


@dataclass
class RunConfig:
    subcommand: str
    equations: Path | None = None
    query: Path | None = None
    net1: Path | None = None
    net2: Path | None = None
    direction: Direction | None = None
    cube_cap: int = DEFAULT_CUBE_CAP
    state_cap: int = DEFAULT_STATE_CAP
    box: int | None = None
    seed: int = 0
    output: Path | None = None

    def __post_init__(self):
        if self.subcommand in ("project", "check", "stats", "validate") and self.equations is None:
            raise ValueError(f"{self.subcommand} needs --equations")
        if self.subcommand in ("project", "check", "stats") and self.query is None:
            raise ValueError(f"{self.subcommand} needs --query")
        if self.subcommand == "check" and (self.net1 is None or self.net2 is None):
            raise ValueError("check needs --net1 and --net2")


class _Invalid(Exception):
    """Validation failure already reported to the user."""


def _read(path: Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _Invalid(f"{path}: {e.strerror}") from None


def _load_system(path: Path) -> ReductionSystem:
    try:
        return parse_equation_file(_read(path))
    except ParseError as e:
        raise e.with_source(str(path))


def _load_query(path: Path) -> QueryFormula:
    try:
        return parse_query(_read(path))
    except ParseError as e:
        raise e.with_source(str(path))


def _load_net(path: Path) -> PetriNet:
    try:
        return parse_net(_read(path))
    except ParseError as e:
        raise e.with_source(str(path))


def _checked_graph(g: TokenFlowGraph) -> TokenFlowGraph:
    violations = validate(g)
    if violations:
        raise _Invalid("token flow graph is not well formed:\n" + "\n".join(f"  {v}" for v in violations))
    return g


def _project(system: ReductionSystem, query: QueryFormula, cfg: RunConfig, g: TokenFlowGraph | None = None) -> ProjectionResult:
    if g is None:
        g = infer_tfg(system, tree_variables(query.body))
    g = _checked_graph(g)
    return project_query(g, elimination_schedule(g), query, cfg.direction, cfg.cube_cap)


def _emit(text: str, output: Path | None):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def cmd_project(cfg: RunConfig) -> int:
    result = _project(_load_system(cfg.equations), _load_query(cfg.query), cfg)
    _emit(format_projection(result), cfg.output)
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    system = _load_system(cfg.equations)
    violations = validate(infer_tfg(system))
    if not violations:
        print("Ok")
        return EXIT_OK
    for v in violations:
        print(v)
    return EXIT_INVALID


def cmd_check(cfg: RunConfig) -> int:
    """Compare verdicts of the original query on N1 and the projection on N2."""
    system = _load_system(cfg.equations)
    query = _load_query(cfg.query)
    n1, n2 = _load_net(cfg.net1), _load_net(cfg.net2)

    equiv = check_e_equivalence(n1, n2, system, cfg.state_cap, cfg.box)
    if not equiv.ok:
        print("FAIL: nets are not related by the reduction system")
        print(equiv)
        return EXIT_FAIL
    print(f"equivalence: {equiv}")

    g = build_tfg(system, p1=n1.places, p2=n2.places)
    result = _project(system, query, cfg, g)
    print(format_projection(result), end="")

    # Verdicts are compared on the EF-normalized bodies; for AG queries the
    # body is the negated invariant, so "reachable" means "violated".
    v1 = check_reachable(n1, to_dnf(query.ef_body(), cfg.cube_cap), cfg.state_cap)
    v2 = check_reachable(n2, result.formula, cfg.state_cap)
    word = "reachable" if query.kind == "EF" else "violated"
    print(f"N1 original: {v1}")
    print(f"N2 projected: {v2}")
    if "inconclusive" in (v1.verdict, v2.verdict):
        print("INCONCLUSIVE: state cap reached")
        return EXIT_INCONCLUSIVE

    approx = result.approximation
    if approx is None:
        ok = v1.verdict == v2.verdict
        note = "identical verdicts" if ok else f"exact projection but verdicts differ ({word})"
    elif approx is Direction.UNDER:
        ok = v1.reachable or not v2.reachable
        if not v2.reachable:
            note = "inconclusive by design: under-approximation not satisfiable in N2"
        else:
            note = "witness transferred" if ok else f"projection {word} in N2 but original is not in N1"
    else:
        ok = v2.reachable or not v1.reachable
        if v2.reachable:
            note = "inconclusive by design: over-approximation satisfiable in N2"
        else:
            note = "unreachability transferred" if ok else f"original {word} in N1 but projection is not in N2"
    print(("PASS: " if ok else "FAIL: ") + note)
    return EXIT_OK if ok else EXIT_FAIL


def _stats_record(name: str, system: ReductionSystem, path: Path, cfg: RunConfig) -> tuple[str, ProjectionResult, float]:
    start = time.monotonic()
    result = _project(system, _load_query(path), cfg)
    wall_ms = int((time.monotonic() - start) * 1000)
    c = result.counts
    ratio = (c.literals_before - c.literals_after) / c.literals_before if c.literals_before else 0.0
    exactness = "exact" if result.exact else result.direction.value
    line = (
        f"query={name} exactness={exactness} red={c.red} agp={c.agp} agd={c.agd} "
        f"literals={c.literals_before}->{c.literals_after} ratio={ratio:.3f} wall_ms={wall_ms}"
    )
    return line, result, ratio


def cmd_stats(cfg: RunConfig) -> int:
    """One line per query file, then a summary line."""
    system = _load_system(cfg.equations)
    root = Path(cfg.query)
    if root.is_dir():
        files = sorted(p for p in root.iterdir() if p.is_file() and not p.name.startswith("."))
    elif root.is_file():
        files = [root]
    else:
        raise _Invalid(f"{root}: no such file or directory")

    lines = []
    ratios = []
    exact = errors = 0
    for path in files:
        try:
            line, result, ratio = _stats_record(path.name, system, path, cfg)
        except (PolyprojError, _Invalid) as e:
            errors += 1
            message = str(e).replace("\n", " ")
            lines.append(f"query={path.name} error={message}")
            continue
        lines.append(line)
        ratios.append(ratio)
        exact += result.exact
    n = len(ratios)
    rate = exact / n if n else 0.0
    median = statistics.median(ratios) if ratios else 0.0
    lines.append(
        f"summary queries={len(files)} projected={n} exact={exact} errors={errors} "
        f"exact_rate={rate:.3f} median_literal_ratio={median:.3f}"
    )
    _emit("".join(l + "\n" for l in lines), cfg.output)
    return EXIT_OK


COMMANDS = {"project": cmd_project, "check": cmd_check, "validate": cmd_validate, "stats": cmd_stats}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyproj", description="Project reachability queries through net reductions.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, query_help: str | None = "query file"):
        p.add_argument("--equations", type=Path, required=True, help="reduction system file")
        if query_help:
            p.add_argument("--query", type=Path, required=True, help=query_help)
        p.add_argument("--direction", choices=["under", "over"], help="approximation direction (default: under for EF, over for AG)")
        p.add_argument("--cube-cap", type=int, default=DEFAULT_CUBE_CAP, help="maximum number of DNF cubes")
        p.add_argument("-o", "--output", type=Path, help="write to this file instead of stdout")

    common(sub.add_parser("project", help="print the projected query"))
    check = sub.add_parser("check", help="validate a projection against two small nets")
    common(check)
    check.add_argument("--net1", type=Path, required=True, help="initial net")
    check.add_argument("--net2", type=Path, required=True, help="reduced net")
    check.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    check.add_argument("--box", type=int, help="bound for the extension search (default: derived from the nets)")
    check.add_argument("--seed", type=int, default=0, help="accepted for reproducibility; the exhaustive check is deterministic")
    validate_p = sub.add_parser("validate", help="check that the reduction system forms a well-formed token flow graph")
    validate_p.add_argument("--equations", type=Path, required=True)
    common(sub.add_parser("stats", help="project every query file in a directory"), "directory of query files (or one file)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    direction = getattr(args, "direction", None)
    return RunConfig(
        subcommand=args.subcommand,
        equations=args.equations,
        query=getattr(args, "query", None),
        net1=getattr(args, "net1", None),
        net2=getattr(args, "net2", None),
        direction=Direction(direction) if direction else None,
        cube_cap=getattr(args, "cube_cap", DEFAULT_CUBE_CAP),
        state_cap=getattr(args, "state_cap", DEFAULT_STATE_CAP),
        box=getattr(args, "box", None),
        seed=getattr(args, "seed", 0),
        output=getattr(args, "output", None),
    )


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except DnfBlowup as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except (CapExceeded, EnumerationTooLarge) as e:
        print(f"inconclusive: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (PolyprojError, _Invalid) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
