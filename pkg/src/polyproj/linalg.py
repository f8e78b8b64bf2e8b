"""Linear integer constraints over place variables.

A literal is a normalized constraint ``sum(k_i * x_i) + b >= 0`` (or ``= 0``
once a pair of opposite literals has been fused by :func:`simplify_cube`).
Queries are parsed from a small text grammar into a comparison tree, then
converted to DNF, i.e. a disjunction of cubes of literals.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .errors import DnfBlowup, MalformedAtom, ParseError, UnboundVariable

DEFAULT_CUBE_CAP = 4096

_DIGITS = re.compile(r"(\d+)")


def natural_key(name: str):
    """Sort key ordering ``p2`` before ``p10``."""
    return tuple(int(part) if part.isdigit() else part for part in _DIGITS.split(name))


# --------------------------------------------------------------------------
# Literals, cubes and DNF formulas


class Literal:
    """Normalized linear constraint ``sum(coeffs[x] * x) + bias >= 0``.

    With ``eq=True`` the relation is ``= 0`` instead. Zero coefficients are
    never stored, and instances are treated as immutable.
    """

    __slots__ = ("coeffs", "bias", "eq", "_key")

    def __init__(self, coeffs: Mapping[str, int] | None = None, bias: int = 0, eq: bool = False):
        items = sorted(((v, int(k)) for v, k in (coeffs or {}).items() if k), key=lambda t: natural_key(t[0]))
        self.coeffs: dict[str, int] = dict(items)
        self.bias = int(bias)
        self.eq = bool(eq)
        self._key = (tuple(items), self.bias, self.eq)

    def coef(self, var: str) -> int:
        return self.coeffs.get(var, 0)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def negated_terms(self) -> "Literal":
        """The literal ``-alpha >= 0`` (or ``-alpha = 0``)."""
        return Literal({v: -k for v, k in self.coeffs.items()}, -self.bias, self.eq)

    def value(self, valuation: Mapping[str, int]) -> int:
        total = self.bias
        for var, k in self.coeffs.items():
            try:
                total += k * valuation[var]
            except KeyError:
                raise UnboundVariable(f"variable {var!r} is not bound") from None
        return total

    def holds(self, valuation: Mapping[str, int]) -> bool:
        v = self.value(valuation)
        return v == 0 if self.eq else v >= 0

    def split(self) -> tuple["Literal", ...]:
        """Equalities as a pair of ``>=`` literals; ``>=`` literals unchanged."""
        if not self.eq:
            return (self,)
        return (Literal(self.coeffs, self.bias), self.negated_terms().with_eq(False))

    def with_eq(self, eq: bool) -> "Literal":
        return Literal(self.coeffs, self.bias, eq)

    def __eq__(self, other):
        return isinstance(other, Literal) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Literal({format_literal(self)!r})"

    def __str__(self):
        return format_literal(self)


@dataclass(frozen=True)
class Cube:
    """Conjunction of literals; an empty cube is TRUE."""

    literals: tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))

    @property
    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for lit in self.literals:
            out.update(lit.coeffs)
        return frozenset(out)

    def split(self) -> "Cube":
        return Cube(tuple(part for lit in self.literals for part in lit.split()))

    def size(self) -> int:
        """Number of ``>=`` literals (a fused equality counts twice)."""
        return sum(2 if lit.eq else 1 for lit in self.literals)

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __str__(self):
        return format_cube(self)


@dataclass(frozen=True)
class DnfFormula:
    """Disjunction of cubes; no cubes is FALSE."""

    cubes: tuple[Cube, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cubes", tuple(self.cubes))

    @property
    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for cube in self.cubes:
            out |= cube.variables
        return frozenset(out)

    def size(self) -> int:
        return sum(cube.size() for cube in self.cubes)

    def __len__(self):
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def __str__(self):
        return format_dnf(self)


TRUE = DnfFormula((Cube(),))
FALSE = DnfFormula(())


class Trivial(Enum):
    TAUT = "taut"
    UNSAT = "unsat"


TAUT = Trivial.TAUT
UNSAT = Trivial.UNSAT


# --------------------------------------------------------------------------
# Comparison trees (parser output)


@dataclass(frozen=True)
class LinExpr:
    """Integer linear expression ``sum(coeffs[x] * x) + const``."""

    coeffs: Mapping[str, int] = field(default_factory=dict)
    const: int = 0

    @classmethod
    def of(cls, *names: str, const: int = 0) -> "LinExpr":
        coeffs: dict[str, int] = {}
        for n in names:
            coeffs[n] = coeffs.get(n, 0) + 1
        return cls(coeffs, const)

    def value(self, valuation: Mapping[str, int]) -> int:
        try:
            return self.const + sum(k * valuation[v] for v, k in self.coeffs.items())
        except KeyError as exc:
            raise UnboundVariable(f"variable {exc.args[0]!r} is not bound") from None

    def minus(self, other: "LinExpr", shift: int = 0) -> tuple[dict[str, int], int]:
        out = dict(self.coeffs)
        for v, k in other.coeffs.items():
            out[v] = out.get(v, 0) - k
        return out, self.const - other.const + shift


CMP_OPS = ("=", "<=", ">=", "<", ">", "!=")
_NEGATED_OP = {"=": "!=", "!=": "=", "<=": ">", ">": "<=", ">=": "<", "<": ">="}


@dataclass(frozen=True)
class Atom:
    lhs: LinExpr
    op: str
    rhs: LinExpr


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Not:
    item: object


@dataclass(frozen=True)
class BoolConst:
    value: bool


Expr = Union[Atom, And, Or, Not, BoolConst]


@dataclass(frozen=True)
class QueryFormula:
    """``EF body`` or ``AG body``."""

    kind: str
    body: Expr

    def __post_init__(self):
        if self.kind not in ("EF", "AG"):
            raise ValueError(f"unknown query kind {self.kind!r}")

    def ef_body(self) -> Expr:
        """Body of the equivalent EF query (AG F is not EF not F)."""
        return self.body if self.kind == "EF" else Not(self.body)


def evaluate_tree(expr: Expr, valuation: Mapping[str, int]) -> bool:
    """Direct recursive evaluation of a comparison tree over the integers."""
    if isinstance(expr, Atom):
        a, b = expr.lhs.value(valuation), expr.rhs.value(valuation)
        return {
            "=": a == b, "!=": a != b, "<=": a <= b, ">=": a >= b, "<": a < b, ">": a > b,
        }[expr.op]
    if isinstance(expr, And):
        return all(evaluate_tree(e, valuation) for e in expr.items)
    if isinstance(expr, Or):
        return any(evaluate_tree(e, valuation) for e in expr.items)
    if isinstance(expr, Not):
        return not evaluate_tree(expr.item, valuation)
    if isinstance(expr, BoolConst):
        return expr.value
    raise TypeError(f"not a formula node: {expr!r}")


def tree_variables(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Atom):
        return frozenset(expr.lhs.coeffs) | frozenset(expr.rhs.coeffs)
    if isinstance(expr, (And, Or)):
        return frozenset().union(*(tree_variables(e) for e in expr.items))
    if isinstance(expr, Not):
        return tree_variables(expr.item)
    return frozenset()


# --------------------------------------------------------------------------
# Normalization and DNF


def normalize_atom(atom: Atom) -> list[Literal]:
    """Rewrite ``lhs op rhs`` as ``>= 0`` literals (strict forms shifted by one)."""
    op = atom.op
    if op in (">=", "="):
        coeffs, bias = atom.lhs.minus(atom.rhs)
        lit = Literal(coeffs, bias)
        return [lit, lit.negated_terms()] if op == "=" else [lit]
    if op == "<=":
        coeffs, bias = atom.rhs.minus(atom.lhs)
        return [Literal(coeffs, bias)]
    if op == ">":
        coeffs, bias = atom.lhs.minus(atom.rhs, -1)
        return [Literal(coeffs, bias)]
    if op == "<":
        coeffs, bias = atom.rhs.minus(atom.lhs, -1)
        return [Literal(coeffs, bias)]
    raise ValueError(f"operator {op!r} must be expanded by to_dnf first")


def _atom_cubes(atom: Atom) -> list[list[Literal]]:
    if atom.op == "!=":
        return [normalize_atom(Atom(atom.lhs, "<", atom.rhs)), normalize_atom(Atom(atom.lhs, ">", atom.rhs))]
    return [normalize_atom(atom)]


def to_dnf(expr: Expr, cube_cap: int = DEFAULT_CUBE_CAP) -> DnfFormula:
    """Push negations to the atoms and distribute conjunctions over disjunctions."""

    def conv(e, positive: bool) -> list[list[Literal]]:
        if isinstance(e, Not):
            return conv(e.item, not positive)
        if isinstance(e, BoolConst):
            return [[]] if e.value == positive else []
        if isinstance(e, Atom):
            return _atom_cubes(e if positive else Atom(e.lhs, _NEGATED_OP[e.op], e.rhs))
        if isinstance(e, (And, Or)):
            conjunctive = isinstance(e, And) == positive
            parts = [conv(item, positive) for item in e.items]
            if not conjunctive:
                out = [c for part in parts for c in part]
                if len(out) > cube_cap:
                    raise DnfBlowup(f"DNF exceeds {cube_cap} cubes")
                return out
            acc: list[list[Literal]] = [[]]
            for part in parts:
                if len(acc) * len(part) > cube_cap:
                    raise DnfBlowup(f"DNF exceeds {cube_cap} cubes")
                acc = [a + b for a in acc for b in part]
            return acc
        raise TypeError(f"not a formula node: {e!r}")

    return DnfFormula(tuple(Cube(tuple(c)) for c in conv(expr, True)))


# --------------------------------------------------------------------------
# Substitution, simplification, evaluation


def substitute(lit: Literal, var: str, expr: LinExpr | Mapping[str, int], const: int = 0) -> Literal:
    """Replace ``var`` by ``expr`` (plus ``const``) and re-normalize."""
    k = lit.coeffs.get(var)
    if not k:
        return lit
    if isinstance(expr, LinExpr):
        terms, const = expr.coeffs, expr.const + const
    else:
        terms = expr
    out = dict(lit.coeffs)
    del out[var]
    for v, c in terms.items():
        out[v] = out.get(v, 0) + k * c
    return Literal(out, lit.bias + k * const, lit.eq)


def simplify_cube(cube: Cube) -> Cube | Trivial:
    """Drop trivial literals, deduplicate, and fuse opposite pairs into equalities.

    Returns :data:`TAUT` when nothing is left and :data:`UNSAT` when a
    variable-free literal is false. The model set is unchanged.
    """
    kept: list[Literal] = []
    seen: set[Literal] = set()
    for lit in cube.literals:
        if lit.is_constant():
            ok = lit.bias == 0 if lit.eq else lit.bias >= 0
            if not ok:
                return UNSAT
            continue
        if lit.eq:
            lit = _canonical_eq(lit)
        if lit not in seen:
            seen.add(lit)
            kept.append(lit)

    eq_keys = {_canonical_eq(l.with_eq(True)) for l in kept if l.eq}
    out: list[Literal] = []
    fused: set[Literal] = set()
    for lit in kept:
        if lit.eq:
            out.append(lit)
            continue
        eq_form = _canonical_eq(lit.with_eq(True))
        if eq_form in eq_keys:
            if eq_form not in fused and eq_form not in out:
                out.append(eq_form)
                fused.add(eq_form)
            continue
        if lit.negated_terms() in seen:
            eq_keys.add(eq_form)
            fused.add(eq_form)
            out.append(eq_form)
            continue
        out.append(lit)
    return Cube(tuple(out)) if out else TAUT


def _canonical_eq(lit: Literal) -> Literal:
    """Equality with its first coefficient positive."""
    first = next(iter(lit.coeffs.values()), lit.bias)
    return lit if first >= 0 else lit.negated_terms()


def evaluate(formula: DnfFormula | Cube, valuation: Mapping[str, int]) -> bool:
    """``valuation |= formula``; every variable of the formula must be bound."""
    missing = [v for v in formula.variables if v not in valuation]
    if missing:
        raise UnboundVariable(f"unbound variables: {', '.join(sorted(missing, key=natural_key))}")
    if isinstance(formula, Cube):
        return all(lit.holds(valuation) for lit in formula.literals)
    return any(all(lit.holds(valuation) for lit in cube.literals) for cube in formula.cubes)


# --------------------------------------------------------------------------
# Text grammar

_TOKEN = re.compile(
    r"(?P<newline>\n)|(?P<space>[ \t\r\f\v]+)|(?P<comment>\#[^\n]*)|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_.']*)|(?P<op><=|>=|!=|=|<|>|\+|-|\*|\(|\))"
)
_KEYWORDS = {"EF", "AG", "and", "or", "not", "true", "false"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        pos = m.end()
        kind, value = m.lastgroup, m.group()
        if kind == "newline":
            line += 1
        elif kind in ("ident", "int", "op"):
            if kind == "ident" and value in _KEYWORDS:
                kind = "kw"
            tokens.append((kind, value, line))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset: int = 0):
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else ("eof", "", self.tokens[-1][2] if self.tokens else 1)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, line = self.next()
        if v != value:
            raise ParseError(f"expected {value!r}, got {v or 'end of input'!r}", line)

    def at(self, value: str) -> bool:
        kind, v, _ = self.peek()
        return kind in ("op", "kw") and v == value

    def query(self) -> QueryFormula:
        kind, v, line = self.next()
        if v not in ("EF", "AG"):
            raise ParseError(f"query must start with EF or AG, got {v or 'end of input'!r}", line)
        body = self.expr()
        self.end()
        return QueryFormula(v, body)

    def end(self):
        kind, v, line = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected token {v!r}", line)

    def expr(self):
        items = [self.conj()]
        while self.at("or"):
            self.next()
            items.append(self.conj())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conj(self):
        items = [self.unary()]
        while self.at("and"):
            self.next()
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self):
        if self.at("not"):
            self.next()
            return Not(self.unary())
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("true") or self.at("false"):
            return BoolConst(self.next()[1] == "true")
        return self.atom()

    def atom(self) -> Atom:
        lhs = self.linexpr()
        kind, op, line = self.next()
        if op not in CMP_OPS or kind != "op":
            raise ParseError(f"expected comparison operator, got {op or 'end of input'!r}", line)
        rhs = self.linexpr()
        return Atom(lhs, op, rhs)

    def linexpr(self) -> LinExpr:
        coeffs: dict[str, int] = {}
        const = 0
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        elif self.at("+"):
            self.next()
        while True:
            k, var = self.term()
            if var is None:
                const += sign * k
            else:
                coeffs[var] = coeffs.get(var, 0) + sign * k
            if self.at("+"):
                sign = 1
            elif self.at("-"):
                sign = -1
            else:
                break
            self.next()
        return LinExpr({v: k for v, k in coeffs.items() if k}, const)

    def term(self) -> tuple[int, str | None]:
        kind, v, line = self.next()
        if kind == "int":
            if self.at("*"):
                self.next()
                k2, v2, line2 = self.next()
                if k2 != "ident":
                    raise ParseError(f"expected identifier after '*', got {v2 or 'end of input'!r}", line2)
                return int(v), v2
            return int(v), None
        if kind == "ident":
            if self.at("*"):
                self.next()
                k2, v2, line2 = self.next()
                if k2 == "ident":
                    raise MalformedAtom(f"non-linear term {v}*{v2}", line2)
                if k2 != "int":
                    raise ParseError(f"expected integer after '*', got {v2 or 'end of input'!r}", line2)
                return int(v2), v
            return 1, v
        raise ParseError(f"expected a term, got {v or 'end of input'!r}", line)


def parse_formula(text: str) -> Expr:
    """Parse a boolean combination of linear comparisons."""
    p = _Parser(text)
    e = p.expr()
    p.end()
    return e


def parse_query(text: str) -> QueryFormula:
    """Parse ``EF expr`` or ``AG expr``; ``#`` starts a comment."""
    return _Parser(text).query()


# --------------------------------------------------------------------------
# Printing


def _format_terms(terms: Iterable[tuple[str, int]], const: int) -> str:
    parts = []
    for var, k in terms:
        parts.append(var if k == 1 else f"{k}*{var}")
    if const or not parts:
        parts.append(str(const))
    return " + ".join(parts)


def _format_relation(coeffs: Mapping[str, int], bias: int, op: str) -> str:
    """Print ``sum + bias op 0`` (op is ``>=``, ``=`` or ``!=``) with positive coefficients."""
    pos = [(v, k) for v, k in coeffs.items() if k > 0]
    neg = [(v, -k) for v, k in coeffs.items() if k < 0]
    pos_const, neg_const = (bias, 0) if bias > 0 else (0, -bias)
    lhs = _format_terms(pos, pos_const)
    rhs = _format_terms(neg, neg_const)
    if op in ("=", "!="):
        if not pos:
            lhs, rhs = rhs, lhs
        return f"{lhs} {op} {rhs}"
    if neg or not pos:
        return f"{rhs} <= {lhs}"
    return f"{lhs} >= {rhs}"


def format_literal(lit: Literal, negate: bool = False) -> str:
    if lit.eq:
        return _format_relation(lit.coeffs, lit.bias, "!=" if negate else "=")
    if negate:
        # not (alpha >= 0) is -alpha - 1 >= 0 over the integers
        return _format_relation({v: -k for v, k in lit.coeffs.items()}, -lit.bias - 1, ">=")
    return _format_relation(lit.coeffs, lit.bias, ">=")


_TRUE_TEXT = "0 <= 0"
_FALSE_TEXT = "1 <= 0"


def format_cube(cube: Cube) -> str:
    if not cube.literals:
        return _TRUE_TEXT
    return " and ".join(format_literal(lit) for lit in cube.literals)


def format_dnf(formula: DnfFormula) -> str:
    if not formula.cubes:
        return _FALSE_TEXT
    if len(formula.cubes) == 1:
        return format_cube(formula.cubes[0])
    return " or ".join(
        f"({format_cube(c)})" if len(c.literals) > 1 else format_cube(c) for c in formula.cubes
    )


def format_negated_dnf(formula: DnfFormula) -> str:
    """Print ``not formula`` as a conjunction of clauses (no distribution)."""
    if not formula.cubes:
        return _TRUE_TEXT
    if any(not c.literals for c in formula.cubes):
        return _FALSE_TEXT
    clauses = []
    for cube in formula.cubes:
        parts = [format_literal(lit, negate=True) for lit in cube.literals]
        if len(parts) == 1:
            clauses.append(parts[0])
        else:
            clauses.append("(" + " or ".join(parts) + ")")
    if len(clauses) == 1 and len(formula.cubes[0].literals) > 1:
        return clauses[0][1:-1]
    return " and ".join(clauses)


def format_query(kind: str, ef_body: DnfFormula) -> str:
    """Print a query whose EF-normalized body is ``ef_body``."""
    if kind == "EF":
        return f"EF {format_dnf(ef_body)}"
    return f"AG {format_negated_dnf(ef_body)}"
