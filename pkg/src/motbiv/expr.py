"""Variety expressions: AST, parser and evaluation.

Grammar::

    expr  := "pt" | "P(" nat ")" | "prod(" expr "," expr ")"
           | "projbundle(" expr ";" poly ("," poly)* ")"
           | "blowup(P(" nat "),P(" nat "))"
    poly  := ["-"] term (("+" | "-") term)*
    term  := rational ("*" factor)* | factor ("*" factor)*
    factor:= generator ["^" nat]

The i-th polynomial of a ``projbundle`` is c_i of the bundle, written in the
base's generator names. The canonical key of the evaluated variety is the
normal form: ``normalize(normalize(s)) == normalize(s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from parsy import ParseError, fail, generate, regex, seq, string, success

from motbiv.errors import ExprParseError, InvalidParameters
from motbiv.exactalg import GradedClass
from motbiv.varmodel import (
    BundleClass,
    VarietyModel,
    make_blowup_linear,
    make_point,
    make_product,
    make_proj,
    make_proj_bundle,
)

Factor = tuple[str, int]
Term = tuple[Fraction, tuple[Factor, ...]]


@dataclass(frozen=True)
class PolyLiteral:
    terms: tuple[Term, ...]
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PointExpr:
    pass


@dataclass(frozen=True)
class ProjExpr:
    n: int


@dataclass(frozen=True)
class ProductExpr:
    left: VarietyExpr
    right: VarietyExpr


@dataclass(frozen=True)
class ProjBundleExpr:
    base: VarietyExpr
    chern: tuple[PolyLiteral, ...]


@dataclass(frozen=True)
class BlowupExpr:
    n: int
    m: int


VarietyExpr = PointExpr | ProjExpr | ProductExpr | ProjBundleExpr | BlowupExpr


# ---------------------------------------------------------------------------
# parser

spaces = regex(r"\s*")


def lexeme(p):
    return p << spaces


def token(s: str):
    return lexeme(string(s))


nat = lexeme(regex(r"[0-9]+").map(int)).desc("natural number")


def _fraction(text: str):
    _, _, denominator = text.partition("/")
    if denominator and int(denominator) == 0:
        return fail("nonzero denominator")
    return success(Fraction(text))


rational = lexeme(regex(r"[0-9]+(/[0-9]+)?").bind(_fraction)).desc("rational")
generator_name = lexeme(regex(r"[a-z][a-z0-9]*(_[0-9]+)?")).desc("generator")
power = (token("^") >> nat).optional().map(lambda p: 1 if p is None else p)
factor = seq(generator_name, power).map(tuple)
sign = token("+").result(1) | token("-").result(-1)


@generate
def term():
    coeff = yield rational.optional()
    if coeff is None:
        first = yield factor
        rest = yield (token("*") >> factor).many()
        return (Fraction(1), (first, *rest))
    rest = yield (token("*") >> factor).many()
    return (coeff, tuple(rest))


@generate
def polynomial():
    lead = yield token("-").result(-1).optional()
    first_coeff, first_factors = yield term
    terms = [(first_coeff * (lead or 1), first_factors)]
    more = yield seq(sign, term).many()
    for s, (coeff, factors) in more:
        terms.append((coeff * s, factors))
    return tuple(terms)


marked_polynomial = polynomial.mark().map(
    lambda marked: PolyLiteral(marked[1], position=marked[0][1])
)

point = token("pt").result(PointExpr())
proj = (token("P") >> token("(") >> nat << token(")")).map(ProjExpr)


@generate
def product():
    yield token("prod") >> token("(")
    left = yield variety
    yield token(",")
    right = yield variety
    yield token(")")
    return ProductExpr(left, right)


@generate
def projbundle():
    yield token("projbundle") >> token("(")
    base = yield variety
    yield token(";")
    chern = yield marked_polynomial.sep_by(token(","), min=1)
    yield token(")")
    return ProjBundleExpr(base, tuple(chern))


@generate
def blowup():
    yield token("blowup") >> token("(")
    n = yield proj
    yield token(",")
    m = yield proj
    yield token(")")
    return BlowupExpr(n.n, m.n)


variety = (projbundle | product | point | blowup | proj).desc("variety expression")
document = spaces >> variety


def parse_expr(text: str) -> VarietyExpr:
    """Parse a variety expression; raises ExprParseError with an offset."""
    try:
        return document.parse(text)
    except ParseError as e:
        raise ExprParseError(f"式を解析できません: {e}", position=e.index) from e


# ---------------------------------------------------------------------------
# rendering


def _format_term(coeff: Fraction, factors: tuple[Factor, ...]) -> str:
    names = "*".join(name if p == 1 else f"{name}^{p}" for name, p in factors)
    magnitude = abs(coeff)
    if not names:
        return str(magnitude)
    return names if magnitude == 1 else f"{magnitude}*{names}"


def unparse_polynomial(lit: PolyLiteral) -> str:
    out: list[str] = []
    for i, (coeff, factors) in enumerate(lit.terms):
        body = _format_term(coeff, factors)
        if i == 0:
            out.append(f"-{body}" if coeff < 0 else body)
        else:
            out.append(f" - {body}" if coeff < 0 else f" + {body}")
    return "".join(out)


def unparse(expr: VarietyExpr) -> str:
    """Print the AST as written, without normalizing."""
    match expr:
        case PointExpr():
            return "pt"
        case ProjExpr(n):
            return f"P({n})"
        case ProductExpr(left, right):
            return f"prod({unparse(left)},{unparse(right)})"
        case ProjBundleExpr(base, chern):
            return f"projbundle({unparse(base)};{','.join(unparse_polynomial(c) for c in chern)})"
        case BlowupExpr(n, m):
            return f"blowup(P({n}),P({m}))"
    raise TypeError(f"unknown expression: {expr!r}")


# ---------------------------------------------------------------------------
# evaluation


def evaluate_polynomial(lit: PolyLiteral, base: VarietyModel) -> GradedClass:
    """Evaluate a polynomial literal in the generators of ``base``."""
    terms: dict[tuple[int, ...], Fraction] = {}
    for coeff, factors in lit.terms:
        mono = [0] * len(base.generators)
        for name, p in factors:
            if name not in base.generators:
                msg = f"{base.key} に生成元 {name} はありません"
                raise ExprParseError(msg, position=lit.position)
            mono[base.generators.index(name)] += p
        key = tuple(mono)
        terms[key] = terms.get(key, Fraction(0)) + coeff
    return GradedClass.from_monomials(base.ring, terms)


def evaluate(expr: VarietyExpr) -> VarietyModel:
    match expr:
        case PointExpr():
            return make_point()
        case ProjExpr(n):
            return make_proj(n)
        case ProductExpr(left, right):
            return make_product(evaluate(left), evaluate(right))
        case ProjBundleExpr():
            base, bundle = evaluate_bundle(expr)
            return make_proj_bundle(base, bundle)
        case BlowupExpr(n, m):
            return make_blowup_linear(n, m)
    raise TypeError(f"unknown expression: {expr!r}")


def evaluate_bundle(expr: ProjBundleExpr) -> tuple[VarietyModel, BundleClass]:
    """The base and the bundle E of a ``projbundle`` expression."""
    base, chern = evaluate(expr.base), expr.chern
    total = base.one()
    for i, lit in enumerate(chern, start=1):
        cls = evaluate_polynomial(lit, base)
        if cls != cls.homogeneous(i):
            msg = f"c_{i} は次数 {i} の斉次式でなければなりません: {unparse_polynomial(lit)}"
            raise ExprParseError(msg, position=lit.position)
        total = total + cls
    try:
        bundle = BundleClass(base, len(chern), total)
    except InvalidParameters as e:
        raise ExprParseError(str(e), position=chern[0].position) from e
    return base, bundle


def parse_variety(text: str) -> VarietyModel:
    return evaluate(parse_expr(text))


def normalize(text: str) -> str:
    """Canonical key of the variety an expression denotes."""
    return parse_variety(text).key
