"""Tests for expr module."""

from fractions import Fraction

import pytest

from motbiv.errors import ExprParseError, InvalidParameters
from motbiv.expr import (
    BlowupExpr,
    PointExpr,
    ProductExpr,
    ProjBundleExpr,
    ProjExpr,
    evaluate_bundle,
    normalize,
    parse_expr,
    parse_variety,
    unparse,
)
from motbiv.varmodel import Construction, make_proj


class TestParseExpr:
    """Tests for parse_expr function."""

    def test_point(self) -> None:
        assert parse_expr("pt") == PointExpr()

    def test_proj(self) -> None:
        assert parse_expr("P(3)") == ProjExpr(3)

    def test_nested_product(self) -> None:
        expr = parse_expr("prod(P(1),prod(pt,P(2)))")

        assert expr == ProductExpr(ProjExpr(1), ProductExpr(PointExpr(), ProjExpr(2)))

    def test_blowup(self) -> None:
        assert parse_expr("blowup(P(3),P(1))") == BlowupExpr(3, 1)

    def test_whitespace_allowed(self) -> None:
        assert parse_expr("  prod( P(1) , P(2) ) ") == parse_expr("prod(P(1),P(2))")

    def test_projbundle(self) -> None:
        expr = parse_expr("projbundle(P(1);2*h,0)")

        assert isinstance(expr, ProjBundleExpr)
        assert expr.base == ProjExpr(1)
        assert len(expr.chern) == 2

    @pytest.mark.parametrize(
        "text",
        ["P(", "Q(1)", "prod(P(1))", "blowup(P(2))", "projbundle(P(1);)", "P(1) extra"],
    )
    def test_parse_errors(self, text: str) -> None:
        with pytest.raises(ExprParseError) as excinfo:
            parse_expr(text)

        assert excinfo.value.position is not None

    @pytest.mark.parametrize("text", ["projbundle(P(1);1/0*h,0)", "projbundle(P(1);h,0/00)"])
    def test_zero_denominator_rejected(self, text: str) -> None:
        with pytest.raises(ExprParseError) as excinfo:
            parse_expr(text)

        assert excinfo.value.position is not None

    def test_rational_coefficient(self) -> None:
        expr = parse_expr("projbundle(P(1);4/2*h,0/3)")
        assert isinstance(expr, ProjBundleExpr)

        assert expr.chern[0].terms == ((Fraction(2), (("h", 1),)),)
        assert expr.chern[1].terms == ((Fraction(0), ()),)


class TestUnparse:
    """Tests for unparse function."""

    @pytest.mark.parametrize(
        "text",
        [
            "pt",
            "P(4)",
            "prod(P(2),P(1))",
            "blowup(P(2),P(0))",
            "projbundle(P(1);h,0)",
            "projbundle(P(2);-h,h^2)",
            "projbundle(prod(P(1),P(1));h_1 + 2*h_2)",
        ],
    )
    def test_prints_as_written(self, text: str) -> None:
        assert unparse(parse_expr(text)) == text


class TestNormalize:
    """Tests for evaluation and normalize."""

    def test_product_order(self) -> None:
        assert normalize("prod(P(2),P(1))") == "prod(P(1),P(2))"

    def test_point_factor_dropped(self) -> None:
        assert normalize("prod(pt,P(1))") == "P(1)"

    def test_p0_is_point(self) -> None:
        assert normalize("P(0)") == "pt"

    @pytest.mark.parametrize(
        "text",
        ["prod(P(2),prod(P(1),P(1)))", "projbundle(P(1);2*h,0)", "blowup(P(3),P(1))"],
    )
    def test_idempotent(self, text: str) -> None:
        once = normalize(text)

        assert normalize(once) == once

    def test_rank_one_bundle_is_base(self) -> None:
        assert parse_variety("projbundle(P(2);h)") is make_proj(2)

    def test_trivial_bundle_over_point(self) -> None:
        assert parse_variety("projbundle(pt;0,0)") is make_proj(1)

    def test_projbundle_construction(self) -> None:
        x = parse_variety("projbundle(P(1);2*h,0)")

        assert x.construction is Construction.PROJBUNDLE
        assert x.dim == 2

    def test_invalid_blowup(self) -> None:
        with pytest.raises(InvalidParameters):
            parse_variety("blowup(P(2),P(2))")


class TestEvaluateBundle:
    """Tests for evaluate_bundle function."""

    def test_rank_and_chern(self) -> None:
        expr = parse_expr("projbundle(P(1);h,0)")
        assert isinstance(expr, ProjBundleExpr)

        base, bundle = evaluate_bundle(expr)

        assert base is make_proj(1)
        assert bundle.rank == 2
        assert bundle.total_chern.render() == "1 + h"

    def test_non_homogeneous_rejected(self) -> None:
        with pytest.raises(ExprParseError, match="斉次"):
            parse_variety("projbundle(P(1);1 + h,0)")

    def test_unknown_generator_rejected(self) -> None:
        with pytest.raises(ExprParseError):
            parse_variety("projbundle(P(1);x,0)")

    def test_chern_above_rank_rejected(self) -> None:
        with pytest.raises(ExprParseError):
            parse_variety("projbundle(P(2);h,h^2,h^2)")
