"""Genus series and the multiplicative characteristic classes they define.

A normalized series Q(α) = 1 + q_1 α + q_2 α² + … is symmetrized over the
Chern roots of a bundle without ever materializing the roots: take
log Q, turn the power sums of the roots into Chern classes with Newton's
identities, and exponentiate inside the truncated Chow ring.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Any

import sympy
from sympy.polys.domains import QQ

from motbiv.errors import InsufficientOrder, InvalidParameters
from motbiv.exactalg import ONE, ZERO, GradedClass, Rational, YPolynomial, divide_exact
from motbiv.varmodel import (
    BundleClass,
    Construction,
    VarietyModel,
    integrate,
    make_proj,
    tangent_bundle,
)

logger = logging.getLogger(__name__)

SERIES_NAMES = ("chern", "todd", "lclass", "hirzebruch")

# クラス名 → 系列名 (unnormalized-ty は系列ではない)
CLASS_NAMES = ("chern", "todd", "lclass", "ty", "unnormalized-ty")


@dataclass(frozen=True)
class GenusSeries:
    """Q(α) = Σ_k coefficients[k]·α^k, known up to ``order``."""

    name: str
    coefficients: tuple[YPolynomial, ...]

    def __post_init__(self) -> None:
        if not self.coefficients or self.coefficients[0] != ONE:
            raise InvalidParameters(f"正規化されていない冪級数です: {self.name}")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, k: int) -> YPolynomial:
        if k > self.order:
            raise InsufficientOrder(f"{self.name} の係数 {k} は次数 {self.order} を超えます")
        return self.coefficients[k]

    def at_least(self, order: int) -> GenusSeries:
        """This series, re-expanded if it is shorter than ``order``."""
        if order <= self.order:
            return self
        if self.name not in SERIES_NAMES:
            msg = f"{self.name} は {self.order} 次までしか展開されていません"
            raise InsufficientOrder(msg)
        return series_named(self.name, order)

    def render(self) -> str:
        parts = []
        for k, c in enumerate(self.coefficients):
            if c.is_zero():
                continue
            power = "" if k == 0 else ("a" if k == 1 else f"a^{k}")
            if not power:
                parts.append(c.render())
            elif c == ONE:
                parts.append(power)
            else:
                parts.append(f"({c.render()})*{power}")
        return " + ".join(parts) if parts else "0"


SERIES_CACHE_SIZE = 128


@lru_cache(maxsize=SERIES_CACHE_SIZE)
def _closed_form_coefficients(name: str, order: int) -> tuple[Rational, ...]:
    x = sympy.Symbol("x")
    closed = {
        "todd": x / (1 - sympy.exp(-x)),
        "lclass": x / sympy.tanh(x),
    }[name]
    expansion = sympy.series(closed, x, 0, order + 1).removeO()
    return tuple(QQ.from_sympy(expansion.coeff(x, k)) for k in range(order + 1))


@lru_cache(maxsize=SERIES_CACHE_SIZE)
def series_named(name: str, order: int) -> GenusSeries:
    """The named normalized series expanded to ``order``.

    ``hirzebruch`` is Q_y(α) = α(1+y)/(1 − e^{−α(1+y)}) − αy, assembled from
    the Todd coefficients as q_k = td_k·(1+y)^k − [k = 1]·y.
    """
    if order < 0:
        raise InvalidParameters(f"級数の次数が負です: {order}")
    if name == "chern":
        coeffs = [ONE] + [ONE if k == 1 else ZERO for k in range(1, order + 1)]
    elif name in ("todd", "lclass"):
        coeffs = [YPolynomial.constant(c) for c in _closed_form_coefficients(name, order)]
    elif name == "hirzebruch":
        todd = _closed_form_coefficients("todd", order)
        coeffs = []
        for k, td in enumerate(todd):
            q = YPolynomial.constant(td).times_one_plus_y(k)
            if k == 1:
                q = q - YPolynomial.y()
            coeffs.append(q)
    else:
        raise InvalidParameters(f"未知の級数です: {name}")
    logger.debug("級数 %s を %d 次まで展開", name, order)
    return GenusSeries(name, tuple(coeffs))


def specialize(q: GenusSeries, value: Any) -> GenusSeries:
    """Substitute y = value in every coefficient."""
    coeffs = tuple(YPolynomial.constant(c.evaluate(value)) for c in q.coefficients)
    return GenusSeries(f"{q.name}@y={value}", coeffs)


# ---------------------------------------------------------------------------
# symmetrization


def _log_coefficients(q: GenusSeries, order: int) -> list[YPolynomial]:
    """l_k with log Q(α) = Σ l_k α^k, from k·q_k = Σ_{j=1}^{k} j·l_j·q_{k−j}."""
    logs = [ZERO]
    for k in range(1, order + 1):
        acc = q.coefficient(k) * k
        for j in range(1, k):
            acc = acc - logs[j] * q.coefficient(k - j) * j
        logs.append(acc * Fraction(1, k))
    return logs


def power_sums(e: BundleClass, order: int) -> list[GradedClass]:
    """p_k = Σ α_i^k in Chern classes (Newton); index 0 holds the rank."""
    one = e.base.one()
    chern = [e.chern(i) if i <= e.rank else e.base.zero() for i in range(order + 1)]
    sums = [one.scaled(e.rank)]
    for k in range(1, order + 1):
        acc = chern[k].scaled(k * (-1) ** (k - 1))
        for i in range(1, k):
            acc = acc + (chern[i] * sums[k - i]).scaled((-1) ** (i - 1))
        sums.append(acc)
    return sums


def _exp(x: GradedClass, order: int) -> GradedClass:
    """exp of a class without degree-0 part, truncated at ``order``."""
    result = GradedClass.one(x.ambient)
    term = result
    for j in range(1, order + 1):
        term = (term * x).scaled(Fraction(1, j))
        if term.is_zero():
            break
        result = result + term
    return result


def multiplicative_class(q: GenusSeries, e: BundleClass) -> GradedClass:
    """∏_i Q(α_i) over the Chern roots of ``e``, truncated at dim of the base."""
    d = e.base.dim
    if q.order < d:
        msg = f"{q.name} の展開次数 {q.order} が底空間の次元 {d} に足りません"
        raise InsufficientOrder(msg)
    if e.rank == 0 or d == 0:
        return e.base.one()
    logs = _log_coefficients(q, d)
    sums = power_sums(e, d)
    total = e.base.zero()
    for k in range(1, d + 1):
        if not logs[k].is_zero():
            total = total + sums[k].scaled(logs[k])
    return _exp(total, d)


def lambda_y_chern_character(e: BundleClass) -> GradedClass:
    """ch(λ_y(E*)) = ∏_j (1 + y·e^{−α_j}).

    With x_j = e^{−α_j}, the power sums are P_k = Σ_m (−k)^m p_m / m!, and
    the elementary symmetric e_p(x) follow from Newton's identities.
    """
    base = e.base
    if e.rank == 0:
        return base.one()
    d = base.dim
    sums = power_sums(e, d)
    exp_sums = [base.zero()]
    for k in range(1, e.rank + 1):
        acc = base.zero()
        for m in range(d + 1):
            acc = acc + sums[m].scaled(Fraction((-k) ** m, factorial(m)))
        exp_sums.append(acc)
    elementary = [base.one()]
    for p in range(1, e.rank + 1):
        acc = base.zero()
        for i in range(1, p + 1):
            acc = acc + (elementary[p - i] * exp_sums[i]).scaled((-1) ** (i - 1))
        elementary.append(acc.scaled(Fraction(1, p)))
    y = YPolynomial.y()
    total = base.zero()
    for p, cls in enumerate(elementary):
        total = total + cls.scaled(y**p)
    return total


def unnormalized_ty_class(e: BundleClass) -> GradedClass:
    """ch(λ_y(E*))·td(E)."""
    if e.rank == 0:
        return e.base.one()
    todd = multiplicative_class(series_named("todd", e.base.dim), e)
    return lambda_y_chern_character(e) * todd


def renormalize_unnormalized(e: BundleClass) -> GradedClass:
    """Substitute α ↦ α(1+y) in the unnormalized class and divide by (1+y)^rank.

    The result lies in QQ[y] and equals T*_y(E); a remainder raises
    NotDivisible.
    """
    return divide_exact(unnormalized_ty_class(e), e.rank, 1)


def hirzebruch_class(e: BundleClass) -> GradedClass:
    return multiplicative_class(series_named("hirzebruch", e.base.dim), e)


def named_class(name: str, e: BundleClass, *, order: int | None = None) -> GradedClass:
    """The class called ``name`` in the CLI: chern, todd, lclass, ty or unnormalized-ty."""
    if name == "unnormalized-ty":
        return unnormalized_ty_class(e)
    series = {"ty": "hirzebruch"}.get(name, name)
    if series not in SERIES_NAMES:
        raise InvalidParameters(f"未知の特性類です: {name}")
    effective = max(order or 0, e.base.dim)
    return multiplicative_class(series_named(series, effective), e)


def chi_y(x: VarietyModel) -> YPolynomial:
    """χ_y(X) = ∫_X T*_y(TX)."""
    if x.is_point:
        return ONE
    return integrate(x, hirzebruch_class(tangent_bundle(x)))


def _chi_y_proj(n: int) -> YPolynomial:
    return YPolynomial.from_coefficients([(-1) ** k for k in range(n + 1)])


def combinatorial_chi_y(x: VarietyModel) -> YPolynomial:
    """χ_y from the construction tree alone.

    Products multiply, a P^{r−1}-bundle multiplies by χ_y(P^{r−1}), and the
    blow-up of P^n along P^m adds χ_y(P^m)·Σ_{i=1}^{c−1} (−y)^i.
    """
    match x.construction:
        case Construction.POINT:
            return ONE
        case Construction.PROJ:
            return _chi_y_proj(x.dim)
        case Construction.PRODUCT:
            result = ONE
            for factor in x.factors:
                result = result * combinatorial_chi_y(factor)
            return result
        case Construction.PROJBUNDLE:
            base = x.params[0]
            rank = x.dim - base.dim + 1
            return combinatorial_chi_y(base) * _chi_y_proj(rank - 1)
        case Construction.BLOWUP:
            n, m = x.params
            correction = YPolynomial.from_coefficients(
                [0] + [(-1) ** i for i in range(1, n - m)]
            )
            return _chi_y_proj(n) + _chi_y_proj(m) * correction
    raise InvalidParameters(f"未知の構成です: {x.construction}")


def chi_y_table(max_n: int) -> dict[int, YPolynomial]:
    """χ_y(P^n) for n = 0..max_n, computed by integration."""
    return {n: chi_y(make_proj(n)) for n in range(max_n + 1)}
