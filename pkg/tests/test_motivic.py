"""Tests for motivic module."""

import pytest

from motbiv.bivariant import BivariantElement, orientation_theta
from motbiv.errors import InvalidDiagram, ReferenceMismatch
from motbiv.exactalg import ZERO
from motbiv.motivic import (
    RelationElement,
    blowup_diagram,
    blowup_relation_element,
    check_genus_shadow,
    check_point_restriction,
    check_product_closure,
    find_witness,
    genus_shadow,
    is_zero_in_k0,
    k0_project,
    linear_blowup_diagram,
    point_specialization_pair,
    relative_blowup_diagram,
    standard_diagrams,
    witnessed_equal,
)
from motbiv.varmodel import make_blowup_linear, make_point, make_proj, to_point


class TestBlowupDiagram:
    """Tests for diagram construction."""

    def test_corners_of_plane_blowup(self) -> None:
        d = linear_blowup_diagram(2, 0)

        assert d.bl is make_blowup_linear(2, 0)
        assert d.e is make_proj(1)
        assert d.x_prime is make_proj(2)
        assert d.s is make_point()

    def test_relative_corners(self) -> None:
        d = relative_blowup_diagram(make_proj(1), 2, 0)

        assert d.x_prime.key == "prod(P(1),P(2))"
        assert d.s is make_proj(1)
        assert d.reference.target is make_proj(1)

    @pytest.mark.parametrize(("n", "m"), [(2, 2), (2, -1), (1, 3)])
    def test_invalid_center(self, n: int, m: int) -> None:
        with pytest.raises(InvalidDiagram):
            blowup_diagram(n, m)

    def test_reference_must_compose(self) -> None:
        with pytest.raises(InvalidDiagram):
            blowup_diagram(2, 0, reference=to_point(make_proj(1)))


class TestRelations:
    """Tests for blow-up relation elements."""

    def test_four_signed_terms(self) -> None:
        relation = blowup_relation_element(linear_blowup_diagram(2, 0))

        assert sorted(n for _, n in relation.element.terms) == [-1, -1, 1, 1]
        assert relation.element.reference == to_point(make_proj(2))

    @pytest.mark.parametrize("index", [0, 1, 2])
    def test_genus_shadow_vanishes(self, index: int) -> None:
        d = standard_diagrams()[index]

        assert genus_shadow(d) == ZERO
        assert check_genus_shadow(d).passed

    def test_point_specialization_description(self) -> None:
        _, description = point_specialization_pair(linear_blowup_diagram(2, 0))

        assert description == (
            "[blowup(P(2),P(0)) -> P(2)] - [P(1) -> P(2)] = [P(2) -> P(2)] - [pt -> P(2)] in K0(V/P(2))"
        )

    def test_point_specialization_needs_point_target(self) -> None:
        with pytest.raises(InvalidDiagram):
            point_specialization_pair(relative_blowup_diagram(make_proj(1), 2, 0))

    def test_product_closure(self) -> None:
        report = check_product_closure(linear_blowup_diagram(2, 0), make_proj(1))

        assert report.passed, report.render()

    def test_point_restriction(self) -> None:
        report = check_point_restriction(relative_blowup_diagram(make_proj(1), 2, 0))

        assert report.passed, report.render()


class TestK0:
    """Tests for witnessed equality in K0."""

    def test_relation_is_zero(self) -> None:
        relation = blowup_relation_element(linear_blowup_diagram(2, 0))
        zero = k0_project(BivariantElement.zero(relation.element.reference))

        assert witnessed_equal(k0_project(relation.element), zero, [(relation, 1)])
        assert not witnessed_equal(k0_project(relation.element), zero, [(relation, 2)])

    def test_find_witness_multiple(self) -> None:
        relation = blowup_relation_element(linear_blowup_diagram(2, 0))

        witness = find_witness(relation.element.scaled(3), [relation])

        assert witness is not None
        assert [n for _, n in witness] == [3]

    def test_free_parameters_fixed_at_zero(self) -> None:
        relation = blowup_relation_element(linear_blowup_diagram(2, 0))
        twice = RelationElement(relation.diagram, relation.element.scaled(2))
        thrice = RelationElement(relation.diagram, relation.element.scaled(3))
        integral = [(twice, -1), (thrice, 1)]

        assert witnessed_equal(
            k0_project(relation.element),
            k0_project(BivariantElement.zero(relation.element.reference)),
            integral,
        )
        assert find_witness(relation.element, [twice, thrice]) is None

    def test_no_witness_for_single_generator(self) -> None:
        relation = blowup_relation_element(linear_blowup_diagram(2, 0))
        theta = orientation_theta(to_point(make_proj(2)))

        assert find_witness(theta, [relation]) is None
        assert not is_zero_in_k0(k0_project(theta), [relation])

    def test_empty_relations(self) -> None:
        theta = orientation_theta(to_point(make_proj(2)))

        assert find_witness(BivariantElement.zero(theta.reference), []) == []
        assert find_witness(theta, []) is None

    def test_reference_mismatch(self) -> None:
        relation = blowup_relation_element(linear_blowup_diagram(2, 0))
        theta = orientation_theta(to_point(make_proj(3)))

        with pytest.raises(ReferenceMismatch):
            find_witness(theta, [relation])

    def test_k0_operations_keep_representatives(self) -> None:
        theta = k0_project(orientation_theta(to_point(make_proj(2))))

        assert (theta - theta).representative.is_zero()
        assert (theta + theta).representative == theta.representative.scaled(2)
