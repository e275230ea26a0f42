"""Tests for genus module."""

import pytest
from sympy.polys.domains import QQ

from motbiv.errors import InsufficientOrder, InvalidParameters
from motbiv.exactalg import ONE, ZERO, YPolynomial
from motbiv.expr import parse_variety
from motbiv.genus import (
    SERIES_CACHE_SIZE,
    GenusSeries,
    chi_y,
    chi_y_table,
    combinatorial_chi_y,
    hirzebruch_class,
    lambda_y_chern_character,
    multiplicative_class,
    named_class,
    power_sums,
    renormalize_unnormalized,
    series_named,
    specialize,
)
from motbiv.varmodel import (
    euler_characteristic,
    integrate,
    make_proj,
    tangent_bundle,
    trivial_bundle,
)


def _constants(series: GenusSeries) -> list:
    return [c.evaluate(0) for c in series.coefficients]


class TestSeries:
    """Tests for the named series."""

    def test_todd_coefficients(self) -> None:
        assert _constants(series_named("todd", 3)) == [QQ(1), QQ(1, 2), QQ(1, 12), QQ(0)]

    def test_lclass_coefficients(self) -> None:
        assert _constants(series_named("lclass", 2)) == [QQ(1), QQ(0), QQ(1, 3)]

    def test_chern(self) -> None:
        assert series_named("chern", 3).coefficients == (ONE, ONE, ZERO, ZERO)

    def test_hirzebruch_linear_term(self) -> None:
        q = series_named("hirzebruch", 2)

        assert q.coefficient(1) == YPolynomial.from_coefficients([QQ(1, 2), QQ(-1, 2)])
        assert q.coefficient(2) == YPolynomial.from_coefficients([QQ(1, 12), QQ(1, 6), QQ(1, 12)])

    @pytest.mark.parametrize(("value", "name"), [(-1, "chern"), (0, "todd"), (1, "lclass")])
    def test_specializations(self, value: int, name: str) -> None:
        special = specialize(series_named("hirzebruch", 3), value)

        assert special.coefficients == series_named(name, 3).coefficients

    def test_must_be_normalized(self) -> None:
        with pytest.raises(InvalidParameters):
            GenusSeries("bad", (ZERO, ONE))

    def test_unknown_series(self) -> None:
        with pytest.raises(InvalidParameters):
            series_named("pontryagin", 2)

    def test_coefficient_beyond_order(self) -> None:
        with pytest.raises(InsufficientOrder):
            series_named("todd", 1).coefficient(2)

    def test_cache_is_bounded(self) -> None:
        for order in range(SERIES_CACHE_SIZE + 10):
            series_named("chern", order)

        info = series_named.cache_info()
        assert info.maxsize == SERIES_CACHE_SIZE
        assert info.currsize <= SERIES_CACHE_SIZE
        assert series_named("todd", 2) is series_named("todd", 2)

    def test_at_least_reexpands(self) -> None:
        assert series_named("todd", 1).at_least(3).order == 3

    def test_specialized_series_cannot_grow(self) -> None:
        special = specialize(series_named("hirzebruch", 1), 0)

        with pytest.raises(InsufficientOrder):
            special.at_least(2)


class TestCharacteristicClasses:
    """Tests for multiplicative classes of bundles."""

    def test_power_sums_of_tangent_plane(self) -> None:
        p2 = make_proj(2)
        sums = power_sums(tangent_bundle(p2), 2)

        assert sums[1] == p2.gen("h").scaled(3)
        assert sums[2] == (p2.gen("h") ** 2).scaled(3)

    def test_chern_class(self) -> None:
        cls = multiplicative_class(series_named("chern", 2), tangent_bundle(make_proj(2)))

        assert cls.render() == "1 + 3*h + 3*h^2"

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_todd_genus_is_one(self, n: int) -> None:
        x = make_proj(n)
        td = named_class("todd", tangent_bundle(x))

        assert integrate(x, td) == ONE

    def test_signature_of_plane(self) -> None:
        x = make_proj(2)

        assert integrate(x, named_class("lclass", tangent_bundle(x))) == ONE

    def test_ty_of_line(self) -> None:
        cls = named_class("ty", tangent_bundle(make_proj(1)))

        assert cls.render() == "1 + (1 - y)*h"

    def test_order_too_low(self) -> None:
        with pytest.raises(InsufficientOrder):
            multiplicative_class(series_named("todd", 1), tangent_bundle(make_proj(2)))

    def test_unknown_class_name(self) -> None:
        with pytest.raises(InvalidParameters):
            named_class("pontryagin", tangent_bundle(make_proj(1)))

    def test_lambda_y_of_trivial_line(self) -> None:
        p1 = make_proj(1)
        cls = lambda_y_chern_character(trivial_bundle(p1, 1))

        assert cls == p1.one().scaled(YPolynomial.one_plus_y_power(1))

    @pytest.mark.parametrize("text", ["P(1)", "P(2)", "prod(P(1),P(1))", "blowup(P(2),P(0))"])
    def test_renormalized_class_matches_hirzebruch(self, text: str) -> None:
        e = tangent_bundle(parse_variety(text))

        assert renormalize_unnormalized(e) == hirzebruch_class(e)


class TestChiY:
    """Tests for the chi_y genus."""

    def test_projective_table(self) -> None:
        table = chi_y_table(3)

        assert table[0] == ONE
        assert table[2].render() == "1 - y + y^2"
        assert table[3].render() == "1 - y + y^2 - y^3"

    def test_blowup_of_plane(self) -> None:
        assert chi_y(parse_variety("blowup(P(2),P(0))")).render() == "1 - 2*y + y^2"

    def test_hirzebruch_surface(self) -> None:
        assert chi_y(parse_variety("projbundle(P(1);h,0)")).render() == "1 - 2*y + y^2"

    @pytest.mark.parametrize(
        "text",
        [
            "P(3)",
            "prod(P(1),P(2))",
            "projbundle(P(1);2*h,0)",
            "blowup(P(2),P(0))",
            "blowup(P(3),P(0))",
            "blowup(P(3),P(1))",
        ],
    )
    def test_matches_combinatorial(self, text: str) -> None:
        x = parse_variety(text)

        assert chi_y(x) == combinatorial_chi_y(x)

    @pytest.mark.parametrize("text", ["P(2)", "prod(P(1),P(1))", "blowup(P(3),P(1))"])
    def test_at_minus_one_is_euler_characteristic(self, text: str) -> None:
        x = parse_variety(text)

        assert chi_y(x).evaluate(-1) == QQ(euler_characteristic(x))
