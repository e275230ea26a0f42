"""Tests for bivariant module."""

import pytest

from motbiv.bivariant import (
    BivariantElement,
    biv_product,
    biv_pullback,
    biv_pushforward,
    check_axiom,
    generator_element,
    gysin_pull,
    gysin_push,
    make_generator,
    orientation_theta,
    unit,
)
from motbiv.errors import CompositeNotSmooth, NotSmooth, ReferenceMismatch
from motbiv.report import Status
from motbiv.varmodel import (
    identity,
    linear_embedding,
    make_point,
    make_product,
    make_proj,
    point_inclusion,
    projection,
    to_point,
)

P2 = make_proj(2)
P1xP2 = make_product(make_proj(1), P2)


def _theta_projection() -> BivariantElement:
    return orientation_theta(projection(P1xP2, [1]))


def _line_class() -> BivariantElement:
    return generator_element(linear_embedding(1, 2), to_point(P2))


class TestElements:
    """Tests for generators and their integer combinations."""

    def test_unit_render(self) -> None:
        assert unit(P2).render() == "[P(2) -> P(2); h=h]"

    def test_point_generator_render(self) -> None:
        element = generator_element(to_point(P2), identity(make_point()))

        assert element.render() == "[P(2) -> pt]"

    def test_coefficients_collect(self) -> None:
        a = _line_class()

        assert (a + a) == a.scaled(2)
        assert (a - a).is_zero()
        assert (a + a).render().startswith("2[P(1) -> P(2)")

    def test_terms_sorted(self) -> None:
        theta = orientation_theta(to_point(P2))
        a = _line_class() + theta
        b = theta + _line_class()

        assert a == b
        assert a.render() == b.render()

    def test_mixed_references_rejected(self) -> None:
        with pytest.raises(ReferenceMismatch):
            _line_class() + unit(P2)

    def test_generator_target_checked(self) -> None:
        with pytest.raises(ReferenceMismatch):
            make_generator(linear_embedding(1, 3), to_point(P2))

    def test_composite_must_be_smooth(self) -> None:
        with pytest.raises(CompositeNotSmooth):
            make_generator(identity(make_proj(1)), linear_embedding(1, 2))

    def test_theta_needs_smooth_map(self) -> None:
        with pytest.raises(NotSmooth):
            orientation_theta(point_inclusion(P2))


class TestOperations:
    """Tests for product, pushforward, pullback and Gysin maps."""

    def test_unit_is_neutral(self) -> None:
        a = _line_class()

        assert biv_product(unit(P2), a) == a
        assert biv_product(a, unit(make_point())) == a

    def test_theta_product(self) -> None:
        product = biv_product(_theta_projection(), orientation_theta(to_point(P2)))

        assert product == orientation_theta(to_point(P1xP2))

    def test_product_reference_checked(self) -> None:
        with pytest.raises(ReferenceMismatch):
            biv_product(_line_class(), _line_class())

    def test_pushforward_relabels(self) -> None:
        a = orientation_theta(to_point(P2))

        pushed = biv_pushforward(to_point(P2), a, identity(make_point()))

        assert pushed.render() == "[P(2) -> pt]"

    def test_pushforward_reference_checked(self) -> None:
        with pytest.raises(ReferenceMismatch):
            biv_pushforward(identity(P2), _theta_projection(), to_point(P2))

    def test_pullback_of_theta(self) -> None:
        pulled = biv_pullback(to_point(P2), orientation_theta(to_point(make_proj(1))))

        assert pulled.reference.source is P1xP2
        assert pulled.reference.target is P2
        assert len(pulled.terms) == 1

    def test_gysin_pull_is_theta_product(self) -> None:
        f = projection(P1xP2, [1])
        a = _line_class()

        assert gysin_pull(f, a) == biv_product(orientation_theta(f), a)

    def test_gysin_push_to_point(self) -> None:
        pushed = gysin_push(to_point(P2), unit(P2))

        assert pushed.render() == "[P(2) -> pt]"

    def test_gysin_push_needs_identity_reference(self) -> None:
        with pytest.raises(ReferenceMismatch):
            gysin_push(to_point(P2), _line_class())


class TestCheckAxiom:
    """Tests for check_axiom."""

    def test_associativity(self) -> None:
        report = check_axiom("B-1", [_theta_projection(), _line_class(), unit(make_point())])

        assert report.passed, report.render()

    def test_units(self) -> None:
        report = check_axiom("units", [_line_class()], [to_point(P2), identity(P2)])

        assert report.passed, report.render()

    def test_theta(self) -> None:
        report = check_axiom("theta", morphisms=[projection(P1xP2, [1]), to_point(P2)])

        assert report.passed, report.render()

    def test_theta_stability(self) -> None:
        report = check_axiom("theta-stability", morphisms=[to_point(make_proj(1)), to_point(P2)])

        assert report.passed, report.render()

    def test_unsupported_square_reported(self) -> None:
        line = linear_embedding(1, 3)
        zero = BivariantElement.zero(line)

        report = check_axiom("B-3", [zero], [line, identity(make_proj(1))])

        assert report.status is Status.UNSUPPORTED
        assert report.to_dict()["pass"] is None

    def test_commutativity_is_informational(self) -> None:
        a = orientation_theta(to_point(make_proj(1)))

        report = check_axiom("commutativity", [a, orientation_theta(to_point(P2))])

        assert report.informational

    def test_unknown_code(self) -> None:
        with pytest.raises(ValueError, match="未知の公理コード"):
            check_axiom("B-9")
