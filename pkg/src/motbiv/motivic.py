"""Blow-up relations and the quotient K0 = M / BL.

A blow-up diagram is built from the linear blow-up of P^n along P^m,
optionally multiplied by a smooth base B, so every corner is a variety of
the constructive class::

    E = B × E0  --i'-->  Bl = B × Bl0
     | q'                  | q
     v                     v
    S = B × P^m --i-->  X' = B × P^n  --h-->  X  --f-->  Y

Equality in K0 is witnessed, never decided: two representatives are equal
when their difference is an explicit integer combination of relations.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from sympy import Matrix, Rational, zeros

from motbiv.bivariant import (
    BivariantElement,
    BivariantGenerator,
    biv_product,
    biv_pullback,
    biv_pushforward,
    generator_element,
    make_generator,
)
from motbiv.errors import (
    CompositeNotSmooth,
    InvalidDiagram,
    InvalidParameters,
    ReferenceMismatch,
)
from motbiv.exactalg import ZERO, YPolynomial
from motbiv.fiber import fiber_product
from motbiv.genus import chi_y
from motbiv.report import CheckReport, compare, guarded
from motbiv.varmodel import (
    BundleClass,
    MorphismModel,
    VarietyModel,
    blow_down,
    center_embedding,
    compose,
    exceptional_inclusion,
    exceptional_projection,
    identity,
    make_point,
    make_product,
    make_proj,
    point_inclusion,
    product_layout,
    projection,
    pullback_bundle,
    tangent_bundle,
    to_point,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BlowupDiagram:
    """Bl_S X' over X --f--> Y with its four corners.

    ``tangents`` holds T_{f h q}, T_{f h i q'}, T_{f h}, T_{f h i} in
    corner order (Bl, E, X', S).
    """

    n: int
    m: int
    base: VarietyModel
    center: MorphismModel  # i: S → X'
    h: MorphismModel  # X' → X
    reference: MorphismModel  # f: X → Y
    blowup: MorphismModel  # q: Bl → X'
    exceptional: MorphismModel  # i': E → Bl
    exceptional_projection: MorphismModel  # q': E → S
    tangents: tuple[BundleClass, ...] = field(default=())

    @property
    def bl(self) -> VarietyModel:
        return self.blowup.source

    @property
    def e(self) -> VarietyModel:
        return self.exceptional.source

    @property
    def x_prime(self) -> VarietyModel:
        return self.h.source

    @property
    def s(self) -> VarietyModel:
        return self.center.source

    def corner_maps(self) -> tuple[MorphismModel, MorphismModel, MorphismModel, MorphismModel]:
        """h∘q, h∘i∘q', h, h∘i."""
        return (
            compose(self.h, self.blowup),
            compose(self.h, compose(self.center, self.exceptional_projection)),
            self.h,
            compose(self.h, self.center),
        )

    def product_with(self, other: VarietyModel) -> BlowupDiagram:
        """Base change by H → pt: every corner multiplied by H."""
        x_prime, positions = product_layout(self.x_prime, other)
        h = compose(self.h, projection(x_prime, positions[0]))
        return blowup_diagram(
            self.n,
            self.m,
            base=make_product(self.base, other),
            h=h,
            reference=self.reference,
        )

    def render(self) -> str:
        return (
            f"Bl_{{{self.s.key}}} {self.x_prime.key} -> {self.h.target.key}"
            f" -> {self.reference.target.key}"
        )


def _base_change_to(base: VarietyModel, n: int) -> tuple[VarietyModel, MorphismModel]:
    """X' = B × P^n with its projection to P^n."""
    pn = make_proj(n)
    if base.is_point:
        return pn, identity(pn)
    x_prime, positions = product_layout(base, pn)
    return x_prime, projection(x_prime, positions[1])


def _corner_tangent(
    corner: MorphismModel,
    smooth_part: MorphismModel,
    reference_over_base: bool,
    absolute: MorphismModel,
    factor_projection: MorphismModel | None,
) -> BundleClass:
    v = corner.source
    if smooth_part.target.is_point:
        return tangent_bundle(v)
    if reference_over_base:
        # B × V0 → B の相対接束は V0 の接束の引き戻し
        if factor_projection is None:
            return tangent_bundle(v)
        return pullback_bundle(factor_projection, tangent_bundle(absolute.source))
    composite = compose(smooth_part, corner)
    if not composite.is_smooth or composite.relative_tangent is None:
        msg = f"f∘h∘({corner.render()}) が滑らかではありません"
        raise InvalidDiagram(msg)
    return composite.relative_tangent


def blowup_diagram(
    n: int,
    m: int,
    *,
    base: VarietyModel | None = None,
    h: MorphismModel | None = None,
    reference: MorphismModel | None = None,
) -> BlowupDiagram:
    """The blow-up of B × P^n along B × P^m, mapped to X by h and to Y by f.

    ``h`` defaults to the identity of X' and ``f`` to the map to the point.
    """
    if m < 0:
        raise InvalidDiagram("空の中心は扱いません")
    if not 0 <= m < n:
        raise InvalidDiagram(f"中心の次元が不正です: P({m}) ⊂ P({n})")
    base = base or make_point()
    x_prime, to_pn = _base_change_to(base, n)
    h = h or identity(x_prime)
    if h.source.key != x_prime.key:
        raise InvalidDiagram(f"h の始域が {x_prime.key} ではありません: {h.render()}")
    reference = reference or to_point(h.target)
    if reference.source.key != h.target.key:
        raise InvalidDiagram(f"参照射が h と合成できません: {reference.render()}")
    if not h.is_proper:
        raise InvalidDiagram(f"h が固有射ではありません: {h.render()}")

    try:
        center_sq = fiber_product(center_embedding(n, m), to_pn)
        blowup_sq = fiber_product(blow_down(n, m), to_pn)
        exc_sq = fiber_product(exceptional_inclusion(n, m), blowup_sq.pr_f)
        proj_sq = fiber_product(exceptional_projection(n, m), center_sq.pr_f)
    except InvalidParameters as e:
        raise InvalidDiagram(str(e)) from e
    if exc_sq.apex.key != proj_sq.apex.key:
        msg = f"例外因子の二つの構成が一致しません: {exc_sq.apex.key} / {proj_sq.apex.key}"
        raise InvalidDiagram(msg)

    smooth_part = compose(reference, h)
    if not smooth_part.is_smooth:
        raise InvalidDiagram(f"f∘h が滑らかではありません: {smooth_part.render()}")
    over_base = False
    if not base.is_point:
        to_base = projection(x_prime, product_layout(base, make_proj(n))[1][0])
        over_base = smooth_part.key == to_base.key

    i, q = center_sq.pr_g, blowup_sq.pr_g
    i_prime, q_prime = exc_sq.pr_g, proj_sq.pr_g
    absolutes = (
        blow_down(n, m),
        exceptional_projection(n, m),
        identity(make_proj(n)),
        center_embedding(n, m),
    )
    factor_projections = (
        blowup_sq.pr_f,
        exc_sq.pr_f,
        to_pn,
        center_sq.pr_f,
    )
    corners = (q, compose(i, q_prime), identity(x_prime), i)
    tangents = tuple(
        _corner_tangent(corner, smooth_part, over_base, absolute, proj)
        for corner, absolute, proj in zip(corners, absolutes, factor_projections, strict=True)
    )
    diagram = BlowupDiagram(
        n=n,
        m=m,
        base=base,
        center=i,
        h=h,
        reference=reference,
        blowup=q,
        exceptional=i_prime,
        exceptional_projection=q_prime,
        tangents=tangents,
    )
    logger.debug("ブローアップ図式: %s", diagram.render())
    return diagram


def linear_blowup_diagram(n: int, m: int, *, reference: MorphismModel | None = None) -> BlowupDiagram:
    """Bl_{P^m} P^n with h = id and f = ``reference`` (default P^n → pt)."""
    return blowup_diagram(n, m, reference=reference)


def relative_blowup_diagram(
    base: VarietyModel, n: int, m: int, *, reference: MorphismModel | None = None
) -> BlowupDiagram:
    """B × Bl_{P^m} P^n over X' = B × P^n; f defaults to the projection onto B."""
    if reference is None:
        x_prime, positions = product_layout(base, make_proj(n))
        reference = projection(x_prime, positions[0])
    return blowup_diagram(n, m, base=base, reference=reference)


# ---------------------------------------------------------------------------
# relations


@dataclass(frozen=True, eq=False)
class RelationElement:
    """[Bl → X] − [E → X] − [X' → X] + [S → X] for ``diagram``."""

    diagram: BlowupDiagram
    element: BivariantElement

    def render(self) -> str:
        return self.element.render()


_SIGNS = (1, -1, -1, 1)


def blowup_relation_element(d: BlowupDiagram) -> RelationElement:
    pairs: list[tuple[BivariantGenerator, int]] = []
    try:
        for corner, tangent, sign in zip(d.corner_maps(), d.tangents, _SIGNS, strict=True):
            pairs.append((make_generator(corner, d.reference, tangent=tangent), sign))
    except (CompositeNotSmooth, ReferenceMismatch) as e:
        raise InvalidDiagram(str(e)) from e
    return RelationElement(d, BivariantElement.from_terms(d.reference, pairs))


def point_specialization_pair(d: BlowupDiagram) -> tuple[RelationElement, str]:
    """The relation of a diagram over Y = pt read as a relation in K0(V/X)."""
    if not d.reference.target.is_point:
        msg = f"Y = pt の図式ではありません: {d.reference.render()}"
        raise InvalidDiagram(msg)
    relation = blowup_relation_element(d)
    x = d.h.target.key
    description = (
        f"[{d.bl.key} -> {x}] - [{d.e.key} -> {x}]"
        f" = [{d.x_prime.key} -> {x}] - [{d.s.key} -> {x}] in K0(V/{x})"
    )
    return relation, description


def genus_shadow(d: BlowupDiagram) -> YPolynomial:
    """χ_y(Bl) − χ_y(E) − χ_y(X') + χ_y(S)."""
    total = ZERO
    for corner, sign in zip((d.bl, d.e, d.x_prime, d.s), _SIGNS, strict=True):
        value = chi_y(corner)
        total = total + value if sign > 0 else total - value
    return total


def check_genus_shadow(d: BlowupDiagram) -> CheckReport:
    return compare("genus-shadow", {"diagram": d.render()}, genus_shadow(d), ZERO)


def check_product_closure(d: BlowupDiagram, other: VarietyModel) -> CheckReport:
    """rbl(d) • [H → pt] = rbl(d × H)."""
    inputs = {"diagram": d.render(), "factor": other.key}

    def body() -> CheckReport:
        factor = generator_element(to_point(other), identity(make_point()))
        lhs = biv_product(blowup_relation_element(d).element, factor)
        rhs = blowup_relation_element(d.product_with(other)).element
        return compare("rbl-product-closure", inputs, lhs, rhs)

    return guarded("rbl-product-closure", inputs, body)


def check_point_restriction(d: BlowupDiagram) -> CheckReport:
    """Pulling a relative relation back to a point of B gives the absolute one."""
    inputs = {"diagram": d.render()}

    def body() -> CheckReport:
        target = d.reference.target
        lhs = biv_pullback(point_inclusion(target), blowup_relation_element(d).element)
        absolute = blowup_relation_element(linear_blowup_diagram(d.n, d.m))
        return compare("rbl-point-restriction", inputs, lhs, absolute.element)

    return guarded("rbl-point-restriction", inputs, body)


# ---------------------------------------------------------------------------
# K0


@dataclass(frozen=True, eq=False)
class K0Element:
    """The class of ``representative`` in K0 = M / BL."""

    representative: BivariantElement

    @property
    def reference(self) -> MorphismModel:
        return self.representative.reference

    def __add__(self, other: K0Element) -> K0Element:
        return K0Element(self.representative + other.representative)

    def __sub__(self, other: K0Element) -> K0Element:
        return K0Element(self.representative - other.representative)

    def product(self, other: K0Element) -> K0Element:
        return K0Element(biv_product(self.representative, other.representative))

    def pushforward(self, f: MorphismModel, g: MorphismModel) -> K0Element:
        return K0Element(biv_pushforward(f, self.representative, g))

    def pullback(self, g: MorphismModel) -> K0Element:
        return K0Element(biv_pullback(g, self.representative))

    def render(self) -> str:
        return f"<{self.representative.render()}>"


def k0_project(a: BivariantElement) -> K0Element:
    return K0Element(a)


Witness = Sequence[tuple[RelationElement, int]]


def witnessed_equal(a: K0Element, b: K0Element, witness: Witness) -> bool:
    """a − b = Σ n_i·rbl_i exactly in M."""
    difference = a.representative - b.representative
    combination = BivariantElement.zero(difference.reference)
    for relation, n in witness:
        combination = combination + relation.element.scaled(n)
    return difference == combination


def find_witness(
    difference: BivariantElement, relations: Sequence[RelationElement]
) -> list[tuple[RelationElement, int]] | None:
    """Integer coefficients n_i with difference = Σ n_i·rbl_i, or None.

    The system is solved exactly over QQ with free parameters set to 0; only
    integral solutions are accepted. When relations are dependent, None may
    come back even though another choice of parameters is integral, so None
    is not a proof that no witness exists.
    """
    for relation in relations:
        if relation.element.reference.key != difference.reference.key:
            raise ReferenceMismatch("関係式の参照射が一致しません")
    if not relations:
        return [] if difference.is_zero() else None
    keys: dict[tuple[Any, ...], int] = {}
    for element in (difference, *(r.element for r in relations)):
        for gen, _ in element.terms:
            keys.setdefault(gen.key, len(keys))
    if not keys:
        return [(r, 0) for r in relations]
    system = zeros(len(keys), len(relations))
    rhs = zeros(len(keys), 1)
    for j, relation in enumerate(relations):
        for gen, n in relation.element.terms:
            system[keys[gen.key], j] = n
    for gen, n in difference.terms:
        rhs[keys[gen.key], 0] = n
    try:
        solution, params = Matrix(system).gauss_jordan_solve(rhs)
    except ValueError:
        return None
    solution = solution.subs({p: 0 for p in params})
    coefficients: list[int] = []
    for value in solution:
        value = Rational(value)
        if value.q != 1:
            logger.debug("整数でない証拠しかありません: %s", value)
            return None
        coefficients.append(int(value.p))
    return list(zip(relations, coefficients, strict=True))


def is_zero_in_k0(a: K0Element, relations: Sequence[RelationElement]) -> bool:
    return find_witness(a.representative, relations) is not None


def standard_diagrams() -> list[BlowupDiagram]:
    """Bl_pt P², Bl_{P¹} P³ over the point and Bl_pt P² relative to P¹."""
    diagrams = [linear_blowup_diagram(2, 0), linear_blowup_diagram(3, 1)]
    diagrams.append(relative_blowup_diagram(make_proj(1), 2, 0))
    return diagrams
