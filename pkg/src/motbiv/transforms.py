"""Grothendieck transformations out of M into CH*(X)⊗QQ[y].

Every constructive variety is smooth, so the target bivariant group over
f: X → Y is modeled by classes on X: the product is a·f*b, pushforward is
the Gysin map and pullback goes through the fiber square. The orientation
[f] maps to 1 and sits in bivariant degree −(dim X − dim Y).
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from motbiv.bivariant import (
    BivariantElement,
    biv_product,
    biv_pushforward,
    gysin_pull,
    gysin_push,
    orientation_theta,
    pullback_square,
)
from motbiv.errors import AmbientMismatch, ReferenceMismatch, ReferenceNotPoint
from motbiv.exactalg import GradedClass, _join_signed, divide_exact
from motbiv.fiber import FiberSquare, fiber_product
from motbiv.genus import (
    GenusSeries,
    chi_y,
    combinatorial_chi_y,
    hirzebruch_class,
    multiplicative_class,
    named_class,
    series_named,
    unnormalized_ty_class,
)
from motbiv.motivic import BlowupDiagram, blowup_relation_element
from motbiv.report import CheckReport, Sides, compare, guarded, unsupported
from motbiv.varmodel import (
    BundleClass,
    MorphismKind,
    MorphismModel,
    VarietyModel,
    compose,
    integrate,
    pullback_class,
    pushforward_class,
    relative_tangent,
    tangent_bundle,
    to_point,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BivariantTargetClass:
    """A class on X standing for an element of H(X --f--> Y)."""

    carrier: GradedClass
    reference: MorphismModel

    def __post_init__(self) -> None:
        if self.carrier.ambient.key != self.reference.source.key:
            msg = f"担体 {self.carrier.ambient.key} が {self.reference.source.key} 上にありません"
            raise ReferenceMismatch(msg)

    @classmethod
    def zero(cls, reference: MorphismModel) -> BivariantTargetClass:
        return cls(reference.source.zero(), reference)

    @property
    def rank(self) -> int:
        """dim X − dim Y, the rank recorded for the orientation [f]."""
        return self.reference.relative_dimension

    def bivariant_degree(self, codim: int) -> int:
        return codim - self.rank

    def evaluate_y(self, value: Any) -> BivariantTargetClass:
        return BivariantTargetClass(self.carrier.evaluate_y(value), self.reference)

    def __add__(self, other: BivariantTargetClass) -> BivariantTargetClass:
        if self.reference.key != other.reference.key:
            raise ReferenceMismatch("参照射が異なる類は足せません")
        return BivariantTargetClass(self.carrier + other.carrier, self.reference)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BivariantTargetClass):
            return NotImplemented
        return self.reference.key == other.reference.key and self.carrier == other.carrier

    def __hash__(self) -> int:
        return hash((self.reference.key, self.carrier.key()))

    def render(self) -> str:
        return self.carrier.render()


@dataclass(frozen=True)
class CovariantClass:
    """A class in H_*(X)⊗QQ[y], indexed by cycle dimension."""

    variety: VarietyModel
    carrier: GradedClass

    def component(self, dimension: int) -> tuple[Any, ...]:
        return self.carrier.component(self.variety.dim - dimension)

    def dimensions(self) -> tuple[int, ...]:
        return tuple(self.variety.dim - c for c in self.carrier.degrees())

    def _cycle_name(self, mono: tuple[int, ...]) -> str:
        if sum(mono) == self.variety.dim:
            return "[pt]"
        if sum(mono) == 0:
            return f"[{self.variety.key}]"
        return f"[{self.variety.ring.monomial_name(mono)}]"

    def render(self) -> str:
        """``[P(1)] + (1 - y)*[pt]``: fundamental class first, point class last."""
        parts: list[tuple[bool, str]] = []
        for mono, coeff in self.carrier.terms():
            name = self._cycle_name(mono)
            if coeff.term_count() == 1:
                lead = next(c for c in coeff.rep if c)
                negative = lead < 0
                body = (-coeff if negative else coeff).render()
                parts.append((negative, name if body == "1" else f"{body}*{name}"))
            else:
                parts.append((False, f"({coeff.render()})*{name}"))
        return _join_signed(parts)


# ---------------------------------------------------------------------------
# target operations


def _transverse(square: FiberSquare, f: MorphismModel, g: MorphismModel) -> bool:
    expected = f.source.dim + g.source.dim - f.target.dim
    return square.transverse and square.apex.dim == expected


def target_product(a: BivariantTargetClass, b: BivariantTargetClass) -> BivariantTargetClass:
    """a • b = a·f*b over g∘f."""
    f, g = a.reference, b.reference
    if f.target.key != g.source.key:
        raise ReferenceMismatch(f"積が定義されません: {f.render()} と {g.render()}")
    return BivariantTargetClass(a.carrier * pullback_class(f, b.carrier), compose(g, f))


def target_pushforward(
    f: MorphismModel, a: BivariantTargetClass, g: MorphismModel
) -> BivariantTargetClass:
    if compose(g, f).key != a.reference.key:
        msg = f"参照射 {a.reference.render()} は {g.render()} ∘ {f.render()} ではありません"
        raise ReferenceMismatch(msg)
    return BivariantTargetClass(pushforward_class(f, a.carrier), g)


def target_pullback(a: BivariantTargetClass, square: FiberSquare) -> BivariantTargetClass:
    """g* along the square X' = X ×_Y Y' of a.reference and g."""
    return BivariantTargetClass(pullback_class(square.pr_f, a.carrier), square.pr_g)


# ---------------------------------------------------------------------------
# transformations


def _sum_over_generators(
    a: BivariantElement, class_of: Callable[[BundleClass], GradedClass]
) -> BivariantTargetClass:
    total = a.reference.source.zero()
    for gen, n in a.terms:
        pushed = pushforward_class(gen.h, class_of(gen.tangent))
        total = total + pushed.scaled(n)
    return BivariantTargetClass(total, a.reference)


def gamma_cl(a: BivariantElement, q: GenusSeries) -> BivariantTargetClass:
    """Σ n·h_*(cℓ(T_{fh})) for the multiplicative class of ``q``."""
    return _sum_over_generators(
        a, lambda tangent: multiplicative_class(q.at_least(tangent.base.dim), tangent)
    )


def lambda_mot_image(a: BivariantElement) -> BivariantTargetClass:
    """Σ n·h_*(ch(λ_y(T*_{fh}))·td(T_{fh}))."""
    return _sum_over_generators(a, unnormalized_ty_class)


def t_y(a: BivariantElement) -> BivariantTargetClass:
    """The renormalized image: codim c scaled by (1+y)^(c − (dim X − dim Y)).

    Division is exact; a remainder raises NotDivisible.
    """
    image = lambda_mot_image(a)
    return BivariantTargetClass(divide_exact(image.carrier, image.rank, 1), a.reference)


def covariant_restrict(c: BivariantTargetClass) -> CovariantClass:
    if not c.reference.target.is_point:
        raise ReferenceNotPoint(f"参照射の終域が点ではありません: {c.reference.render()}")
    return CovariantClass(c.reference.source, c.carrier)


@dataclass(frozen=True)
class Transformation:
    name: str
    apply: Callable[[BivariantElement], BivariantTargetClass]

    def __call__(self, a: BivariantElement) -> BivariantTargetClass:
        return self.apply(a)


def gamma_transformation(series: str) -> Transformation:
    q = series_named(series, 1)
    return Transformation(f"gamma-{series}", lambda a: gamma_cl(a, q))


LAMBDA = Transformation("lambda", lambda_mot_image)
TY = Transformation("ty", t_y)


def transformation_named(name: str) -> Transformation:
    """``lambda``, ``ty`` or ``gamma-<series>``."""
    if name == "lambda":
        return LAMBDA
    if name == "ty":
        return TY
    if name.startswith("gamma-"):
        return gamma_transformation(name.removeprefix("gamma-"))
    raise ValueError(f"未知の変換です: {name}")


# 公理スイートで法則を検証する変換
LAW_TRANSFORMATIONS = ("gamma-todd", "gamma-chern", "ty")


# ---------------------------------------------------------------------------
# laws


def _product_transverse(a: BivariantElement, b: BivariantElement) -> bool:
    for alpha, _ in a.terms:
        for beta, _ in b.terms:
            outer = fiber_product(alpha.reference, beta.h)
            inner = fiber_product(alpha.h, outer.pr_f)
            if not (
                _transverse(outer, alpha.reference, beta.h)
                and _transverse(inner, alpha.h, outer.pr_f)
            ):
                return False
    return True


def law_product(t: Transformation, a: BivariantElement, b: BivariantElement) -> CheckReport:
    """t(a•b) = t(a)•t(b)."""
    check = f"law-product:{t.name}"
    inputs = {"a": a.render(), "b": b.render()}

    def body() -> CheckReport:
        if not _product_transverse(a, b):
            return unsupported(check, inputs, "横断的でないファイバー積を含みます")
        return compare(check, inputs, t(biv_product(a, b)), target_product(t(a), t(b)))

    return guarded(check, inputs, body)


def law_pushforward(
    t: Transformation, f: MorphismModel, a: BivariantElement, g: MorphismModel
) -> CheckReport:
    """t(f_* a) = f_* t(a)."""
    check = f"law-pushforward:{t.name}"
    inputs = {"a": a.render(), "f": f.render(), "g": g.render()}

    def body() -> CheckReport:
        lhs = t(biv_pushforward(f, a, g))
        return compare(check, inputs, lhs, target_pushforward(f, t(a), g))

    return guarded(check, inputs, body)


def law_pullback(t: Transformation, g: MorphismModel, a: BivariantElement) -> CheckReport:
    """t(g* a) = g* t(a) on transverse squares."""
    check = f"law-pullback:{t.name}"
    inputs = {"a": a.render(), "g": g.render()}

    def body() -> CheckReport:
        pulled, square = pullback_square(g, a)
        if not _transverse(square, a.reference, g):
            return unsupported(check, inputs, "横断的でないファイバー積です")
        for gen, _ in a.terms:
            if not _transverse(fiber_product(gen.h, square.pr_f), gen.h, square.pr_f):
                return unsupported(check, inputs, "生成元の引き戻しが横断的ではありません")
        return compare(check, inputs, t(pulled), target_pullback(t(a), square))

    return guarded(check, inputs, body)


# ---------------------------------------------------------------------------
# checks


def check_blowup_vanishing(
    d: BlowupDiagram, which: str, q: GenusSeries | None = None
) -> CheckReport:
    """The transformation ``which`` (lambda, ty or gamma with ``q``) kills rbl(d)."""
    if which == "gamma":
        if q is None:
            raise ValueError("gamma には級数が必要です")
        transform = Transformation(f"gamma-{q.name}", lambda a: gamma_cl(a, q))
    else:
        transform = transformation_named(which)
    check = f"vanishing:{transform.name}"
    inputs = {"diagram": d.render()}

    def body() -> CheckReport:
        relation = blowup_relation_element(d).element
        value = transform(relation)
        return compare(check, inputs, value, BivariantTargetClass.zero(d.reference))

    return guarded(check, inputs, body)


def verdier_rr_check(f: MorphismModel, q: GenusSeries, a: BivariantElement) -> CheckReport:
    """γ(f^! a) = cℓ(T_f)·f*γ(a) for smooth f: X → Y and a over Y → Z."""
    check = f"verdier-rr:{q.name}"
    inputs = {"f": f.render(), "a": a.render()}

    def body() -> CheckReport:
        lhs = gamma_cl(gysin_pull(f, a), q)
        tangent = relative_tangent(f)
        factor = multiplicative_class(q.at_least(f.source.dim), tangent)
        rhs = factor * pullback_class(f, gamma_cl(a, q).carrier)
        return compare(check, inputs, lhs.carrier, rhs)

    return guarded(check, inputs, body)


def sga6_rr_check(g: MorphismModel, q: GenusSeries, a: BivariantElement) -> CheckReport:
    """γ(g_! a) = g_*(γ(a)·cℓ(T_g)) for proper smooth g: Y' → Y and a over id_{Y'}."""
    check = f"sga6-rr:{q.name}"
    inputs = {"g": g.render(), "a": a.render()}

    def body() -> CheckReport:
        lhs = gamma_cl(gysin_push(g, a), q)
        factor = multiplicative_class(q.at_least(g.source.dim), relative_tangent(g))
        rhs = pushforward_class(g, gamma_cl(a, q).carrier * factor)
        return compare(check, inputs, lhs.carrier, rhs)

    return guarded(check, inputs, body)


def module_property_check(
    beta: BivariantElement, alpha: BivariantElement, q: GenusSeries
) -> CheckReport:
    """γ(β•α) = γ(β)·γ(α) for β over id_X and α over X → pt."""
    check = f"module-property:{q.name}"
    inputs = {"beta": beta.render(), "alpha": alpha.render()}

    if beta.reference.kind is not MorphismKind.IDENTITY:
        raise AmbientMismatch(f"β は恒等射の上の元でなければなりません: {beta.reference.render()}")
    if beta.reference.source.key != alpha.reference.source.key:
        raise AmbientMismatch("β と α の空間が一致しません")

    def body() -> CheckReport:
        lhs = gamma_cl(biv_product(beta, alpha), q).carrier
        rhs = gamma_cl(beta, q).carrier * gamma_cl(alpha, q).carrier
        return compare(check, inputs, lhs, rhs)

    return guarded(check, inputs, body)


def module_property_class_check(
    beta: GradedClass, alpha: BivariantElement, q: GenusSeries
) -> CheckReport:
    """Σ n·h_*(h*β·cℓ(T)) = β·γ(α) for a cohomology class β on X."""
    check = f"module-property-class:{q.name}"
    inputs = {"beta": beta.render(), "alpha": alpha.render()}
    x = alpha.reference.source
    if beta.ambient.key != x.key:
        raise AmbientMismatch(f"β が {x.key} 上にありません")

    def body() -> CheckReport:
        lhs = x.zero()
        for gen, n in alpha.terms:
            local = pullback_class(gen.h, beta) * multiplicative_class(
                q.at_least(gen.source.dim), gen.tangent
            )
            lhs = lhs + pushforward_class(gen.h, local).scaled(n)
        rhs = beta * gamma_cl(alpha, q).carrier
        return compare(check, inputs, lhs, rhs)

    return guarded(check, inputs, body)


_SPECIALIZATIONS = ((-1, "chern"), (0, "todd"), (1, "lclass"))


def specialization_check(e: BundleClass) -> list[CheckReport]:
    """T*_y(E) at y = −1, 0, 1 against the Chern, Todd and L classes."""
    ty = hirzebruch_class(e)
    reports = []
    for value, name in _SPECIALIZATIONS:
        inputs = {"bundle": e.render(), "y": value}
        reports.append(
            compare(f"specialization:{name}", inputs, ty.evaluate_y(value), named_class(name, e))
        )
    return reports


def triangle_check(a: BivariantElement) -> list[CheckReport]:
    """t_y at y = 0, −1, 1 and the λ image at y = 0 against γ of the named classes."""
    ty = t_y(a)
    lam = lambda_mot_image(a)
    inputs = {"a": a.render()}
    reports = []
    for value, name in _SPECIALIZATIONS:
        gamma = gamma_cl(a, series_named(name, 1))
        reports.append(compare(f"triangle:ty@{value}", inputs, ty.evaluate_y(value), gamma))
    todd = gamma_cl(a, series_named("todd", 1))
    reports.append(compare("triangle:lambda@0", inputs, lam.evaluate_y(0), todd))
    return reports


def covariant_agreement_check(a: BivariantElement) -> CheckReport:
    """covariant_restrict(t_y(a)) = Σ n·h_*(T*_y(TV)∩[V]) for a over X → pt."""
    inputs = {"a": a.render()}

    def body() -> CheckReport:
        lhs = covariant_restrict(t_y(a))
        x = a.reference.source
        direct = x.zero()
        for gen, n in a.terms:
            local = hirzebruch_class(tangent_bundle(gen.source))
            direct = direct + pushforward_class(gen.h, local).scaled(n)
        return compare("covariant-agreement", inputs, lhs, CovariantClass(x, direct))

    return guarded("covariant-agreement", inputs, body)


def genus_consistency_check(x: VarietyModel) -> CheckReport:
    """∫_X t_y(θ(X → pt)) = χ_y(X) = the combinatorial χ_y."""
    inputs = {"variety": x.key}
    theta = orientation_theta(to_point(x))
    integral = integrate(x, t_y(theta).carrier)
    lhs = Sides((integral, integral))
    rhs = Sides((chi_y(x), combinatorial_chi_y(x)))
    return compare("genus-consistency", inputs, lhs, rhs)
