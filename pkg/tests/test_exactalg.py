"""Tests for exactalg module."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import QQ

from motbiv.errors import AmbientMismatch, InvalidParameters, NotDivisible
from motbiv.exactalg import (
    ONE,
    ZERO,
    GradedClass,
    GradedRing,
    YPolynomial,
    divide_exact,
    format_rational,
    integrate_ring,
    rational,
    ring_add,
    ring_mul,
)
from motbiv.varmodel import make_product, make_proj

polys = st.lists(st.integers(-3, 3), max_size=3).map(YPolynomial.from_coefficients)

P2 = make_proj(2)
P1xP2 = make_product(make_proj(1), make_proj(2))


def classes_on(ring: GradedRing) -> st.SearchStrategy[GradedClass]:
    levels = [st.tuples(*[polys for _ in level]) for level in ring.basis]
    return st.tuples(*levels).map(
        lambda rows: GradedClass.from_degree_map(ring, dict(enumerate(rows)))
    )


product_classes = classes_on(P1xP2.ring)


class TestRational:
    """Tests for rational and format_rational."""

    def test_lowest_terms(self) -> None:
        assert rational(3, 6) == QQ(1, 2)

    def test_from_string(self) -> None:
        assert rational("-4/6") == QQ(-2, 3)

    def test_from_fraction(self) -> None:
        assert rational(Fraction(1, 3)) == QQ(1, 3)

    def test_zero_denominator(self) -> None:
        with pytest.raises(ZeroDivisionError):
            rational(1, 0)

    def test_format(self) -> None:
        assert format_rational(QQ(5)) == "5"
        assert format_rational(QQ(-1, 12)) == "-1/12"


class TestYPolynomial:
    """Tests for YPolynomial."""

    def test_render_alternating(self) -> None:
        p = YPolynomial.from_coefficients([1, -1, 1])

        assert p.render() == "1 - y + y^2"

    def test_render_zero(self) -> None:
        assert ZERO.render() == "0"

    def test_render_rational_coefficients(self) -> None:
        p = YPolynomial.from_coefficients([Fraction(1, 2), 0, -3])

        assert p.render() == "1/2 - 3*y^2"

    def test_leading_zeros_stripped(self) -> None:
        p = YPolynomial.from_coefficients([1, 0, 0])

        assert p == ONE
        assert p.degree == 0

    def test_evaluate(self) -> None:
        p = YPolynomial.from_coefficients([1, -1, 1])

        assert p.evaluate(2) == QQ(3)
        assert p.evaluate(Fraction(1, 2)) == QQ(3, 4)

    def test_one_plus_y_power(self) -> None:
        assert YPolynomial.one_plus_y_power(2).render() == "1 + 2*y + y^2"

    def test_exact_division(self) -> None:
        p = YPolynomial.from_coefficients([1, 3, 3, 1])

        assert p.divide_by_one_plus_y(2).render() == "1 + y"

    def test_inexact_division_raises(self) -> None:
        with pytest.raises(NotDivisible):
            YPolynomial.y().divide_by_one_plus_y()

    def test_negative_power_rejected(self) -> None:
        with pytest.raises(InvalidParameters):
            YPolynomial.y() ** -1

    @settings(max_examples=50, deadline=None)
    @given(polys, polys, polys)
    def test_ring_axioms(self, a: YPolynomial, b: YPolynomial, c: YPolynomial) -> None:
        assert a + b == b + a
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a - a == ZERO

    @settings(max_examples=50, deadline=None)
    @given(polys, st.integers(0, 3))
    def test_times_then_divide(self, a: YPolynomial, k: int) -> None:
        assert a.times_one_plus_y(k).divide_by_one_plus_y(k) == a


class TestGradedRing:
    """Tests for GradedRing validation and structure constants."""

    def test_degree_zero_must_be_unit(self) -> None:
        with pytest.raises(InvalidParameters):
            GradedRing(key="bad", generators=("h",), basis=[[(1,)], [(1,)]], reducer=dict)

    def test_top_degree_must_be_single(self) -> None:
        with pytest.raises(InvalidParameters):
            GradedRing(
                key="bad", generators=("a", "b"), basis=[[(0, 0)], [(1, 0), (0, 1)]], reducer=dict
            )

    def test_ranks_of_product(self) -> None:
        assert P1xP2.ring.ranks() == (1, 2, 2, 1)

    def test_truncation_above_dimension(self) -> None:
        h = P2.gen("h")

        assert (h**3).is_zero()
        assert (h**2).render() == "h^2"


class TestGradedClass:
    """Tests for GradedClass arithmetic."""

    def test_render_with_y_coefficients(self) -> None:
        p1 = make_proj(1)
        cls = p1.one() + p1.gen("h").scaled(ONE - YPolynomial.y())

        assert cls.render() == "1 + (1 - y)*h"

    def test_render_negative_term(self) -> None:
        cls = P2.one() - P2.gen("h").scaled(2)

        assert cls.render() == "1 - 2*h"

    def test_ambient_mismatch(self) -> None:
        with pytest.raises(AmbientMismatch):
            ring_add(P2.one(), make_proj(1).one())

    def test_integrate_point_class(self) -> None:
        assert integrate_ring(P1xP2.point_class) == ONE

    def test_product_mixes_factors(self) -> None:
        h1 = P1xP2.gen("h_1")
        h2 = P1xP2.gen("h_2")

        assert integrate_ring(ring_mul(h1, h2 * h2)) == ONE
        assert (h1 * h1).is_zero()

    def test_evaluate_y(self) -> None:
        cls = P2.gen("h").scaled(YPolynomial.from_coefficients([1, 2]))

        assert cls.evaluate_y(1).render() == "3*h"

    def test_divide_exact_round_trip(self) -> None:
        cls = P2.one() + P2.gen("h") + P2.gen("h") ** 2

        scaled = divide_exact(cls, 0, 1)

        assert scaled.render() == "1 + (1 + y)*h + (1 + 2*y + y^2)*h^2"
        assert divide_exact(scaled, 0, -1) == cls

    def test_divide_exact_not_divisible(self) -> None:
        with pytest.raises(NotDivisible):
            divide_exact(P2.gen("h"), 0, -1)

    def test_divide_exact_bad_sign(self) -> None:
        with pytest.raises(InvalidParameters):
            divide_exact(P2.one(), 0, 2)

    @settings(max_examples=30, deadline=None)
    @given(product_classes, product_classes, product_classes)
    def test_ring_axioms(self, a: GradedClass, b: GradedClass, c: GradedClass) -> None:
        assert a + b == b + a
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * P1xP2.one() == a

    @settings(max_examples=30, deadline=None)
    @given(product_classes)
    def test_hash_matches_equality(self, a: GradedClass) -> None:
        b = a + P1xP2.zero()

        assert a == b
        assert hash(a) == hash(b)
