"""Exact rational and y-polynomial arithmetic, and truncated graded rings.

Coefficients live in ``QQ[y]``. Polynomials are stored as sympy dense
univariate lists (highest degree first) and all arithmetic is delegated to
``sympy.polys.densearith``. Graded rings are presented by a monomial basis
and a normal-form map supplied by :mod:`motbiv.varmodel`.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from sympy.polys.densearith import (
    dup_add,
    dup_div,
    dup_mul,
    dup_mul_ground,
    dup_neg,
    dup_pow,
    dup_sub,
)
from sympy.polys.densebasic import dup_strip
from sympy.polys.densetools import dup_eval
from sympy.polys.domains import QQ

from motbiv.errors import AmbientMismatch, InvalidParameters, NotDivisible

Rational = Any  # element of QQ (sympy PythonMPQ or gmpy2.mpq)
Monomial = tuple[int, ...]

_ONE_PLUS_Y = [QQ(1), QQ(1)]


def rational(numerator: Any, denominator: int = 1) -> Rational:
    """Build an exact rational in lowest terms."""
    if isinstance(numerator, QQ.dtype) and denominator == 1:
        return numerator
    if isinstance(numerator, Fraction):
        return QQ(numerator.numerator, numerator.denominator * denominator)
    if isinstance(numerator, str):
        frac = Fraction(numerator)
        return QQ(frac.numerator, frac.denominator * denominator)
    if isinstance(numerator, int):
        if denominator == 0:
            raise ZeroDivisionError("denominator is zero")
        return QQ(numerator, denominator)
    # sympy Rational / Integer
    return QQ.from_sympy(numerator) / QQ(denominator)


def format_rational(value: Rational) -> str:
    """Render a rational as ``p`` or ``p/q``."""
    num, den = int(value.numerator), int(value.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


@dataclass(frozen=True, slots=True)
class YPolynomial:
    """Polynomial in y with rational coefficients.

    ``rep`` is the sympy dense representation: highest degree first, no
    leading zeros, empty for the zero polynomial.
    """

    rep: tuple[Rational, ...] = ()

    @classmethod
    def from_dense(cls, rep: Iterable[Rational]) -> YPolynomial:
        return cls(tuple(dup_strip(list(rep))))

    @classmethod
    def from_coefficients(cls, ascending: Sequence[Any]) -> YPolynomial:
        """Build from coefficients indexed by power of y."""
        return cls.from_dense(rational(c) for c in reversed(ascending))

    @classmethod
    def constant(cls, value: Any) -> YPolynomial:
        q = rational(value)
        return cls((q,)) if q else cls()

    @classmethod
    def y(cls) -> YPolynomial:
        return cls((QQ(1), QQ(0)))

    @classmethod
    def one_plus_y_power(cls, times: int) -> YPolynomial:
        return cls.from_dense(dup_pow(_ONE_PLUS_Y, times, QQ))

    @property
    def degree(self) -> int:
        return len(self.rep) - 1

    def is_zero(self) -> bool:
        return not self.rep

    def coefficient(self, k: int) -> Rational:
        if k < 0 or k > self.degree:
            return QQ(0)
        return self.rep[self.degree - k]

    def coefficients(self) -> tuple[Rational, ...]:
        """Coefficients in ascending powers of y."""
        return tuple(reversed(self.rep))

    def is_constant(self) -> bool:
        return self.degree <= 0

    def term_count(self) -> int:
        return sum(1 for c in self.rep if c)

    def __add__(self, other: object) -> YPolynomial:
        other_p = _as_ypolynomial(other)
        if other_p is None:
            return NotImplemented
        return YPolynomial(tuple(dup_add(list(self.rep), list(other_p.rep), QQ)))

    __radd__ = __add__

    def __sub__(self, other: object) -> YPolynomial:
        other_p = _as_ypolynomial(other)
        if other_p is None:
            return NotImplemented
        return YPolynomial(tuple(dup_sub(list(self.rep), list(other_p.rep), QQ)))

    def __rsub__(self, other: object) -> YPolynomial:
        other_p = _as_ypolynomial(other)
        if other_p is None:
            return NotImplemented
        return other_p - self

    def __neg__(self) -> YPolynomial:
        return YPolynomial(tuple(dup_neg(list(self.rep), QQ)))

    def __mul__(self, other: object) -> YPolynomial:
        if isinstance(other, YPolynomial):
            return YPolynomial(tuple(dup_mul(list(self.rep), list(other.rep), QQ)))
        if isinstance(other, (int, Fraction)) or isinstance(other, QQ.dtype):
            return self.scale(rational(other))
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int) -> YPolynomial:
        if n < 0:
            raise InvalidParameters(f"負の冪は扱えません: {n}")
        return YPolynomial(tuple(dup_pow(list(self.rep), n, QQ)))

    def scale(self, c: Rational) -> YPolynomial:
        if not c:
            return YPolynomial()
        return YPolynomial(tuple(dup_mul_ground(list(self.rep), c, QQ)))

    def evaluate(self, value: Any) -> Rational:
        """Evaluate at a rational point."""
        return dup_eval(list(self.rep), rational(value), QQ)

    def times_one_plus_y(self, times: int = 1) -> YPolynomial:
        if times == 0 or not self.rep:
            return self
        return self * YPolynomial.one_plus_y_power(times)

    def divide_by_one_plus_y(self, times: int = 1) -> YPolynomial:
        """Synthetic division by (1+y)^times; the remainder must vanish."""
        if times == 0 or not self.rep:
            return self
        quotient, remainder = dup_div(
            list(self.rep), dup_pow(_ONE_PLUS_Y, times, QQ), QQ
        )
        if remainder:
            msg = f"(1+y)^{times} で割り切れません: {self.render()}"
            raise NotDivisible(msg)
        return YPolynomial(tuple(quotient))

    def render(self) -> str:
        """Ascending-power text form, e.g. ``1 - y + y^2``."""
        parts: list[tuple[bool, str]] = []
        for k, c in enumerate(self.coefficients()):
            if not c:
                continue
            negative = c < 0
            magnitude = -c if negative else c
            power = "" if k == 0 else ("y" if k == 1 else f"y^{k}")
            if not power:
                body = format_rational(magnitude)
            elif magnitude == 1:
                body = power
            else:
                body = f"{format_rational(magnitude)}*{power}"
            parts.append((negative, body))
        return _join_signed(parts)

    def __str__(self) -> str:
        return self.render()


ZERO = YPolynomial()
ONE = YPolynomial.constant(1)


def _as_ypolynomial(value: object) -> YPolynomial | None:
    if isinstance(value, YPolynomial):
        return value
    if isinstance(value, (int, Fraction)) or isinstance(value, QQ.dtype):
        return YPolynomial.constant(value)
    return None


def _join_signed(parts: Sequence[tuple[bool, str]]) -> str:
    if not parts:
        return "0"
    first_negative, first = parts[0]
    out = [f"-{first}" if first_negative else first]
    for negative, body in parts[1:]:
        out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


class GradedRing:
    """A presented graded ring with explicit monomial basis.

    Every generator has degree 1. ``basis[d]`` lists the degree-d normal-form
    monomials; ``reducer`` rewrites any monomial into a rational combination
    of basis monomials. The single top-degree basis monomial integrates to 1.
    """

    def __init__(
        self,
        *,
        key: str,
        generators: Sequence[str],
        basis: Sequence[Sequence[Monomial]],
        reducer: Callable[[Monomial], Mapping[Monomial, Rational]],
    ) -> None:
        self.key = key
        self.generators = tuple(generators)
        self.dim = len(basis) - 1
        self.basis: tuple[tuple[Monomial, ...], ...] = tuple(
            tuple(level) for level in basis
        )
        self._reducer = reducer
        self._index: dict[Monomial, tuple[int, int]] = {}
        for d, level in enumerate(self.basis):
            for i, mono in enumerate(level):
                self._index[mono] = (d, i)
        unit = (0,) * len(self.generators)
        if self.basis[0] != (unit,):
            raise InvalidParameters(f"次数0の基底は {{1}} でなければなりません: {key}")
        if len(self.basis[self.dim]) != 1:
            raise InvalidParameters(f"最高次の基底は1元でなければなりません: {key}")
        self._lock = threading.RLock()
        self._normal_forms: dict[Monomial, dict[Monomial, Rational]] = {}
        self._products: dict[tuple[int, int, int, int], tuple[tuple[int, Rational], ...]] = {}

    def __repr__(self) -> str:
        return f"GradedRing({self.key!r})"

    def rank(self, d: int) -> int:
        if d < 0 or d > self.dim:
            return 0
        return len(self.basis[d])

    def ranks(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.basis)

    def index_of(self, mono: Monomial) -> tuple[int, int]:
        return self._index[mono]

    def normal_form(self, mono: Monomial) -> dict[Monomial, Rational]:
        """Rewrite a monomial into basis monomials (memoized)."""
        cached = self._normal_forms.get(mono)
        if cached is not None:
            return cached
        if sum(mono) > self.dim:
            result: dict[Monomial, Rational] = {}
        elif mono in self._index:
            result = {mono: QQ(1)}
        else:
            result = {m: c for m, c in self._reducer(mono).items() if c}
        with self._lock:
            self._normal_forms.setdefault(mono, result)
        return result

    def multiply_monomials(self, a: Monomial, b: Monomial) -> dict[Monomial, Rational]:
        return self.normal_form(tuple(x + y for x, y in zip(a, b, strict=True)))

    def multiply_forms(
        self, a: Mapping[Monomial, Rational], b: Mapping[Monomial, Rational]
    ) -> dict[Monomial, Rational]:
        """Product of two rational combinations of monomials."""
        out: dict[Monomial, Rational] = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                for m, c in self.multiply_monomials(ma, mb).items():
                    out[m] = out.get(m, QQ(0)) + ca * cb * c
        return {m: c for m, c in out.items() if c}

    def basis_product(self, d1: int, i: int, d2: int, j: int) -> tuple[tuple[int, Rational], ...]:
        """Structure constants: basis[d1][i]·basis[d2][j] in degree d1+d2."""
        key = (d1, i, d2, j) if (d1, i) <= (d2, j) else (d2, j, d1, i)
        cached = self._products.get(key)
        if cached is not None:
            return cached
        if d1 + d2 > self.dim:
            result: tuple[tuple[int, Rational], ...] = ()
        else:
            form = self.multiply_monomials(self.basis[d1][i], self.basis[d2][j])
            result = tuple(
                sorted((self._index[m][1], c) for m, c in form.items())
            )
        with self._lock:
            self._products.setdefault(key, result)
        return result

    def monomial_name(self, mono: Monomial) -> str:
        factors = []
        for name, power in zip(self.generators, mono, strict=True):
            if power == 1:
                factors.append(name)
            elif power > 1:
                factors.append(f"{name}^{power}")
        return "*".join(factors) if factors else "1"

    def point_monomial(self) -> Monomial:
        return self.basis[self.dim][0]


@dataclass(frozen=True, eq=False)
class GradedClass:
    """Element of a truncated graded ring with QQ[y] coefficients.

    ``components`` holds ``(degree, coordinates)`` pairs in increasing degree;
    all-zero degrees are omitted and every coordinate vector has exactly the
    length of the ambient basis in that degree.
    """

    ambient: GradedRing
    components: tuple[tuple[int, tuple[YPolynomial, ...]], ...] = ()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_degree_map(
        cls, ambient: GradedRing, by_degree: Mapping[int, Sequence[YPolynomial]]
    ) -> GradedClass:
        comps = []
        for d in sorted(by_degree):
            if d < 0 or d > ambient.dim:
                continue
            coords = tuple(by_degree[d])
            if len(coords) != ambient.rank(d):
                msg = f"座標数が基底と一致しません: degree {d} of {ambient.key}"
                raise InvalidParameters(msg)
            if any(not c.is_zero() for c in coords):
                comps.append((d, coords))
        return cls(ambient, tuple(comps))

    @classmethod
    def zero(cls, ambient: GradedRing) -> GradedClass:
        return cls(ambient, ())

    @classmethod
    def constant(cls, ambient: GradedRing, value: Any) -> GradedClass:
        poly = value if isinstance(value, YPolynomial) else YPolynomial.constant(value)
        return cls.from_degree_map(ambient, {0: (poly,)})

    @classmethod
    def one(cls, ambient: GradedRing) -> GradedClass:
        return cls.constant(ambient, 1)

    @classmethod
    def from_monomials(
        cls, ambient: GradedRing, terms: Mapping[Monomial, Any]
    ) -> GradedClass:
        """Reduce a combination of arbitrary monomials into the basis."""
        acc: dict[int, list[YPolynomial]] = {}
        for mono, coeff in terms.items():
            poly = coeff if isinstance(coeff, YPolynomial) else YPolynomial.constant(coeff)
            if poly.is_zero():
                continue
            for basis_mono, c in ambient.normal_form(mono).items():
                d, i = ambient.index_of(basis_mono)
                row = acc.setdefault(d, [ZERO] * ambient.rank(d))
                row[i] = row[i] + poly.scale(c)
        return cls.from_degree_map(ambient, acc)

    @classmethod
    def monomial(cls, ambient: GradedRing, mono: Monomial, coeff: Any = 1) -> GradedClass:
        return cls.from_monomials(ambient, {mono: coeff})

    @classmethod
    def generator(cls, ambient: GradedRing, name: str) -> GradedClass:
        position = ambient.generators.index(name)
        mono = tuple(1 if k == position else 0 for k in range(len(ambient.generators)))
        return cls.monomial(ambient, mono)

    # -- access -----------------------------------------------------------

    def component(self, d: int) -> tuple[YPolynomial, ...]:
        for degree, coords in self.components:
            if degree == d:
                return coords
        return (ZERO,) * self.ambient.rank(d)

    def degrees(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.components)

    def is_zero(self) -> bool:
        return not self.components

    def terms(self) -> list[tuple[Monomial, YPolynomial]]:
        """Nonzero ``(basis monomial, coefficient)`` pairs in rendering order."""
        out = []
        for d, coords in self.components:
            for i, c in enumerate(coords):
                if not c.is_zero():
                    out.append((self.ambient.basis[d][i], c))
        return out

    def key(self) -> tuple[Any, ...]:
        return (
            self.ambient.key,
            tuple((d, tuple(c.rep for c in coords)) for d, coords in self.components),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedClass):
            return NotImplemented
        return self.ambient.key == other.ambient.key and self.components == other.components

    def __hash__(self) -> int:
        return hash(self.key())

    # -- arithmetic -------------------------------------------------------

    def _check_ambient(self, other: GradedClass) -> None:
        if self.ambient is not other.ambient and self.ambient.key != other.ambient.key:
            msg = f"アンビエントが一致しません: {self.ambient.key} と {other.ambient.key}"
            raise AmbientMismatch(msg)

    def _combine(self, other: GradedClass, sign: int) -> GradedClass:
        self._check_ambient(other)
        acc: dict[int, list[YPolynomial]] = {d: list(v) for d, v in self.components}
        for d, coords in other.components:
            row = acc.setdefault(d, [ZERO] * self.ambient.rank(d))
            for i, c in enumerate(coords):
                row[i] = row[i] + c if sign > 0 else row[i] - c
        return GradedClass.from_degree_map(self.ambient, acc)

    def __add__(self, other: object) -> GradedClass:
        if not isinstance(other, GradedClass):
            return NotImplemented
        return self._combine(other, 1)

    def __sub__(self, other: object) -> GradedClass:
        if not isinstance(other, GradedClass):
            return NotImplemented
        return self._combine(other, -1)

    def __neg__(self) -> GradedClass:
        return self.scaled(-1)

    def __mul__(self, other: object) -> GradedClass:
        if isinstance(other, GradedClass):
            return self._ring_mul(other)
        if isinstance(other, (YPolynomial, int, Fraction)) or isinstance(other, QQ.dtype):
            return self.scaled(other)
        return NotImplemented

    def __rmul__(self, other: object) -> GradedClass:
        if isinstance(other, (YPolynomial, int, Fraction)) or isinstance(other, QQ.dtype):
            return self.scaled(other)
        return NotImplemented

    def _ring_mul(self, other: GradedClass) -> GradedClass:
        self._check_ambient(other)
        ring = self.ambient
        acc: dict[int, list[YPolynomial]] = {}
        for d1, v1 in self.components:
            for d2, v2 in other.components:
                d = d1 + d2
                if d > ring.dim:
                    continue
                row = acc.setdefault(d, [ZERO] * ring.rank(d))
                for i, a in enumerate(v1):
                    if a.is_zero():
                        continue
                    for j, b in enumerate(v2):
                        if b.is_zero():
                            continue
                        ab = a * b
                        for k, c in ring.basis_product(d1, i, d2, j):
                            row[k] = row[k] + ab.scale(c)
        return GradedClass.from_degree_map(ring, acc)

    def scaled(self, factor: Any) -> GradedClass:
        poly = factor if isinstance(factor, YPolynomial) else YPolynomial.constant(factor)
        return self.map_coefficients(lambda c: c * poly)

    def __pow__(self, n: int) -> GradedClass:
        result = GradedClass.one(self.ambient)
        for _ in range(n):
            result = result * self
        return result

    def map_coefficients(self, fn: Callable[[YPolynomial], YPolynomial]) -> GradedClass:
        return GradedClass.from_degree_map(
            self.ambient, {d: [fn(c) for c in coords] for d, coords in self.components}
        )

    def scale_by_degree(self, fn: Callable[[int], YPolynomial]) -> GradedClass:
        """Multiply the degree-d component by ``fn(d)``."""
        return GradedClass.from_degree_map(
            self.ambient,
            {d: [c * fn(d) for c in coords] for d, coords in self.components},
        )

    def truncated(self, max_degree: int) -> GradedClass:
        return GradedClass(
            self.ambient, tuple((d, v) for d, v in self.components if d <= max_degree)
        )

    def homogeneous(self, d: int) -> GradedClass:
        return GradedClass(self.ambient, tuple((k, v) for k, v in self.components if k == d))

    def evaluate_y(self, value: Any) -> GradedClass:
        """Substitute y = value in every coefficient."""
        return self.map_coefficients(lambda c: YPolynomial.constant(c.evaluate(value)))

    def is_y_free(self) -> bool:
        return all(c.is_constant() for _, coords in self.components for c in coords)

    def rational_form(self) -> dict[Monomial, Rational]:
        """Basis-monomial form of a y-free class."""
        return {mono: c.coefficient(0) for mono, c in self.terms()}

    # -- rendering --------------------------------------------------------

    def render(self) -> str:
        terms = self.terms()
        if not terms:
            return "0"
        parts: list[tuple[bool, str]] = []
        for mono, coeff in terms:
            name = self.ambient.monomial_name(mono)
            if coeff.term_count() == 1:
                lead = next(c for c in coeff.rep if c)
                negative = lead < 0
                body = (-coeff if negative else coeff).render()
                if name != "1":
                    body = name if body == "1" else f"{body}*{name}"
                parts.append((negative, body))
            elif name == "1":
                body = coeff.render() if len(terms) == 1 else f"({coeff.render()})"
                parts.append((False, body))
            else:
                parts.append((False, f"({coeff.render()})*{name}"))
        return _join_signed(parts)

    def __str__(self) -> str:
        return self.render()


def ring_add(a: GradedClass, b: GradedClass) -> GradedClass:
    """Componentwise sum; raises AmbientMismatch across ambients."""
    return a + b


def ring_mul(a: GradedClass, b: GradedClass) -> GradedClass:
    """Product in the presented ring, truncated above the dimension."""
    return a * b


def divide_exact(p: GradedClass, shift: int, sign: int = 1) -> GradedClass:
    """Scale the codim-c component by (1+y)^(sign·(c − shift)).

    Negative exponents divide exactly; a nonzero remainder raises
    NotDivisible.
    """
    if sign not in (1, -1):
        raise InvalidParameters(f"sign は ±1 のみ: {sign}")
    by_degree: dict[int, list[YPolynomial]] = {}
    for d, coords in p.components:
        exponent = sign * (d - shift)
        if exponent >= 0:
            by_degree[d] = [c.times_one_plus_y(exponent) for c in coords]
        else:
            by_degree[d] = [c.divide_by_one_plus_y(-exponent) for c in coords]
    return GradedClass.from_degree_map(p.ambient, by_degree)


def integrate_ring(c: GradedClass) -> YPolynomial:
    """Coefficient of the point monomial in the top-degree component."""
    return c.component(c.ambient.dim)[0]
