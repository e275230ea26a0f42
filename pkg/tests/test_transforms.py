"""Tests for transforms module."""

from dataclasses import replace

import pytest

from motbiv.bivariant import generator_element, orientation_theta, unit
from motbiv.errors import AmbientMismatch, ReferenceMismatch, ReferenceNotPoint, UnsupportedMorphism
from motbiv.exactalg import ONE
from motbiv.expr import parse_variety
from motbiv.genus import chi_y, series_named
from motbiv.motivic import linear_blowup_diagram
from motbiv.report import Status
from motbiv.transforms import (
    LAMBDA,
    TY,
    BivariantTargetClass,
    check_blowup_vanishing,
    covariant_agreement_check,
    covariant_restrict,
    gamma_cl,
    genus_consistency_check,
    lambda_mot_image,
    law_product,
    law_pullback,
    law_pushforward,
    module_property_check,
    module_property_class_check,
    sga6_rr_check,
    specialization_check,
    t_y,
    target_product,
    transformation_named,
    triangle_check,
    verdier_rr_check,
)
from motbiv.varmodel import (
    corrupt_push_table,
    identity,
    integrate,
    linear_embedding,
    make_point,
    make_product,
    make_proj,
    projection,
    tangent_bundle,
    to_point,
)

P1 = make_proj(1)
P2 = make_proj(2)
P1xP2 = make_product(P1, P2)


class TestTransformations:
    """Tests for gamma, lambda and t_y on elements."""

    def test_ty_of_line(self) -> None:
        assert t_y(orientation_theta(to_point(P1))).render() == "1 + (1 - y)*h"

    def test_gamma_chern(self) -> None:
        image = gamma_cl(orientation_theta(to_point(P2)), series_named("chern", 2))

        assert image.render() == "1 + 3*h + 3*h^2"

    def test_gamma_todd_integrates_to_one(self) -> None:
        image = gamma_cl(orientation_theta(to_point(P2)), series_named("todd", 1))

        assert integrate(P2, image.carrier) == ONE

    def test_lambda_over_identity_point_is_chi_y(self) -> None:
        element = generator_element(to_point(P2), identity(make_point()))

        assert lambda_mot_image(element).carrier.component(0) == (chi_y(P2),)

    def test_rank_is_relative_dimension(self) -> None:
        image = t_y(orientation_theta(projection(P1xP2, [1])))

        assert image.rank == 1
        assert image.bivariant_degree(1) == 0

    def test_named_transformations(self) -> None:
        assert transformation_named("ty") is TY
        assert transformation_named("lambda") is LAMBDA
        assert transformation_named("gamma-todd").name == "gamma-todd"

        with pytest.raises(ValueError, match="未知の変換"):
            transformation_named("delta")

    def test_carrier_must_live_on_source(self) -> None:
        with pytest.raises(ReferenceMismatch):
            BivariantTargetClass(P1.one(), to_point(P2))

    def test_target_product_reference_checked(self) -> None:
        a = t_y(orientation_theta(to_point(P2)))

        with pytest.raises(ReferenceMismatch):
            target_product(a, a)


class TestCovariant:
    """Tests for covariant restriction."""

    def test_render_line(self) -> None:
        c = covariant_restrict(t_y(orientation_theta(to_point(P1))))

        assert c.render() == "[P(1)] + (1 - y)*[pt]"
        assert c.dimensions() == (1, 0)

    def test_needs_point_target(self) -> None:
        with pytest.raises(ReferenceNotPoint):
            covariant_restrict(t_y(orientation_theta(projection(P1xP2, [1]))))

    def test_agreement(self) -> None:
        report = covariant_agreement_check(orientation_theta(to_point(P2)))

        assert report.passed, report.render()


class TestLaws:
    """Tests for the natural transformation laws."""

    @pytest.mark.parametrize("name", ["ty", "gamma-todd", "gamma-chern", "lambda"])
    def test_product(self, name: str) -> None:
        t = transformation_named(name)
        a = orientation_theta(projection(P1xP2, [1]))

        report = law_product(t, a, orientation_theta(to_point(P2)))

        assert report.passed, report.render()

    @pytest.mark.parametrize("name", ["ty", "gamma-todd", "lambda"])
    def test_pushforward(self, name: str) -> None:
        t = transformation_named(name)
        a = orientation_theta(to_point(P2))

        report = law_pushforward(t, to_point(P2), a, identity(make_point()))

        assert report.passed, report.render()

    @pytest.mark.parametrize("name", ["ty", "gamma-chern"])
    def test_pullback(self, name: str) -> None:
        t = transformation_named(name)

        report = law_pullback(t, to_point(P2), orientation_theta(to_point(P1)))

        assert report.passed, report.render()


class TestRiemannRoch:
    """Tests for the Riemann-Roch and module property checks."""

    @pytest.mark.parametrize("series", ["todd", "chern", "hirzebruch"])
    def test_verdier(self, series: str) -> None:
        report = verdier_rr_check(
            projection(P1xP2, [1]), series_named(series, 1), orientation_theta(to_point(P2))
        )

        assert report.passed, report.render()

    @pytest.mark.parametrize("series", ["todd", "chern", "hirzebruch"])
    def test_sga6(self, series: str) -> None:
        report = sga6_rr_check(to_point(P2), series_named(series, 1), unit(P2))

        assert report.passed, report.render()

    def test_module_property(self) -> None:
        report = module_property_check(
            unit(P2), orientation_theta(to_point(P2)), series_named("todd", 2)
        )

        assert report.passed, report.render()

    def test_module_property_needs_identity(self) -> None:
        theta = orientation_theta(to_point(P2))

        with pytest.raises(AmbientMismatch):
            module_property_check(theta, theta, series_named("todd", 2))

    def test_module_property_class(self) -> None:
        line = generator_element(linear_embedding(1, 2), to_point(P2))

        report = module_property_class_check(P2.gen("h"), line, series_named("todd", 2))

        assert report.passed, report.render()

    def test_module_property_class_unsupported_is_counted(self, monkeypatch: pytest.MonkeyPatch) -> None:
        def degenerate(m, c):
            raise UnsupportedMorphism("ポアンカレ双対が退化しています")

        monkeypatch.setattr("motbiv.transforms.pushforward_class", degenerate)
        line = generator_element(linear_embedding(1, 2), to_point(P2))

        report = module_property_class_check(P2.gen("h"), line, series_named("todd", 2))

        assert report.status is Status.UNSUPPORTED

    def test_module_property_class_ambient_checked(self) -> None:
        line = generator_element(linear_embedding(1, 2), to_point(P2))

        with pytest.raises(AmbientMismatch):
            module_property_class_check(make_proj(1).gen("h"), line, series_named("todd", 2))


class TestConsistencyChecks:
    """Tests for specialization, triangle and genus checks."""

    def test_specialization(self) -> None:
        reports = specialization_check(tangent_bundle(P2))

        assert [r.check for r in reports] == [
            "specialization:chern",
            "specialization:todd",
            "specialization:lclass",
        ]
        assert all(r.passed for r in reports)

    def test_triangle(self) -> None:
        reports = triangle_check(orientation_theta(to_point(P2)))

        assert len(reports) == 4
        assert all(r.passed for r in reports), [r.render() for r in reports]

    @pytest.mark.parametrize("text", ["P(2)", "blowup(P(2),P(0))", "projbundle(P(1);h,0)"])
    def test_genus_consistency(self, text: str) -> None:
        assert genus_consistency_check(parse_variety(text)).passed


class TestBlowupVanishing:
    """Tests for check_blowup_vanishing."""

    @pytest.mark.parametrize("which", ["lambda", "ty"])
    def test_motivic_transformations_vanish(self, which: str) -> None:
        assert check_blowup_vanishing(linear_blowup_diagram(2, 0), which).passed

    @pytest.mark.parametrize("series", ["todd", "chern", "lclass", "hirzebruch"])
    def test_gamma_vanishes(self, series: str) -> None:
        d = linear_blowup_diagram(3, 1)

        assert check_blowup_vanishing(d, "gamma", series_named(series, d.bl.dim)).passed

    def test_gamma_needs_series(self) -> None:
        with pytest.raises(ValueError):
            check_blowup_vanishing(linear_blowup_diagram(2, 0), "gamma")

    def test_corrupted_blow_down_detected(self) -> None:
        d = linear_blowup_diagram(2, 0)
        corrupted = replace(d, blowup=corrupt_push_table(d.blowup))

        report = check_blowup_vanishing(corrupted, "gamma", series_named("chern", 2))

        assert report.status is Status.FAIL
