"""Projection of reachability queries through polyhedral net reductions."""

from .errors import (
    CapExceeded,
    DnfBlowup,
    DuplicateDefinition,
    EnumerationTooLarge,
    MalformedAtom,
    ParseError,
    PolarizationViolated,
    PolyprojError,
    ProgressFailure,
    UnboundVariable,
    UnknownEquationKind,
    UnknownNode,
    UnknownTransition,
    UnknownVariable,
    UnsupportedInequality,
)
from .linalg import (
    FALSE,
    TRUE,
    Cube,
    DnfFormula,
    Literal,
    QueryFormula,
    evaluate,
    format_dnf,
    format_query,
    parse_formula,
    parse_query,
    simplify_cube,
    substitute,
    to_dnf,
)
from .petri import (
    PetriNet,
    check_e_equivalence,
    check_reachable,
    fire,
    integer_shadow,
    parse_net,
    random_walk,
    reachable_markings,
)
from .projector import Direction, ProjectionResult, format_projection, project_cube, project_query
from .redsys import Equation, Kind, ReductionSystem, desugar_inequalities, parse_equation_file
from .tfg import TokenFlowGraph, build_tfg, elimination_schedule, infer_tfg, successors, validate

__version__ = "0.1.0"
