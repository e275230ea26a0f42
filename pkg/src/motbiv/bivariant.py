"""The free bivariant theory M(V/X → Y).

An element over a reference morphism f: X → Y is a finite integer
combination of generators [V --h--> X] with h proper and f∘h smooth.
Product, pushforward and pullback are computed generator by generator
through fiber squares; every generator carries the relative tangent class
of f∘h so that characteristic classes can be evaluated on it later.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Any

from motbiv.errors import (
    CompositeNotSmooth,
    NotProper,
    NotSmooth,
    ReferenceMismatch,
)
from motbiv.fiber import FiberSquare, fiber_product
from motbiv.report import CheckReport, Sides, compare, guarded
from motbiv.varmodel import (
    BundleClass,
    MorphismKind,
    MorphismModel,
    VarietyModel,
    compose,
    identity,
    pullback_bundle,
    pullback_class,
    to_point,
)

logger = logging.getLogger(__name__)

AXIOM_CODES = ("B-1", "B-2", "B-3", "B-4", "B-5", "B-6", "B-7")
CHECK_CODES = (*AXIOM_CODES, "units", "theta", "theta-stability", "commutativity")


@dataclass(frozen=True, eq=False)
class BivariantGenerator:
    """[V --h--> X] over ``reference``; ``tangent`` is T_{f∘h} on V."""

    h: MorphismModel
    reference: MorphismModel
    tangent: BundleClass

    @property
    def source(self) -> VarietyModel:
        return self.h.source

    @property
    def key(self) -> tuple[Any, ...]:
        return self.h.key

    @property
    def sort_key(self) -> tuple[str, tuple[str, ...]]:
        return (self.h.source.key, tuple(img.render() for img in self.h.images))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BivariantGenerator):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def render(self) -> str:
        x = self.h.target
        if not x.generators:
            return f"[{self.source.key} -> {x.key}]"
        images = ", ".join(
            f"{g}={img.render()}" for g, img in zip(x.generators, self.h.images, strict=True)
        )
        return f"[{self.source.key} -> {x.key}; {images}]"


def make_generator(
    h: MorphismModel, f: MorphismModel, *, tangent: BundleClass | None = None
) -> BivariantGenerator:
    """Validate [V --h--> X] over f: h proper and f∘h smooth."""
    if h.target.key != f.source.key:
        msg = f"生成元の終域 {h.target.key} が参照射の始域 {f.source.key} と一致しません"
        raise ReferenceMismatch(msg)
    if not h.is_proper:
        raise NotProper(f"固有射ではありません: {h.render()}")
    if tangent is None:
        composite = compose(f, h)
        if not composite.is_smooth or composite.relative_tangent is None:
            msg = f"f∘h が滑らかではありません: {h.render()} の後に {f.render()}"
            raise CompositeNotSmooth(msg)
        tangent = composite.relative_tangent
    return BivariantGenerator(h, f, tangent)


@dataclass(frozen=True, eq=False)
class BivariantElement:
    """Σ n_i [V_i → X] over ``reference``; terms sorted, no zero coefficients."""

    reference: MorphismModel
    terms: tuple[tuple[BivariantGenerator, int], ...] = ()

    @classmethod
    def from_terms(
        cls,
        reference: MorphismModel,
        pairs: Iterable[tuple[BivariantGenerator, int]],
    ) -> BivariantElement:
        acc: dict[tuple[Any, ...], list[Any]] = {}
        for gen, coeff in pairs:
            if gen.h.target.key != reference.source.key:
                msg = f"生成元 {gen.render()} は {reference.render()} 上にありません"
                raise ReferenceMismatch(msg)
            slot = acc.setdefault(gen.key, [gen, 0])
            slot[1] += coeff
        terms = [(gen, n) for gen, n in acc.values() if n != 0]
        terms.sort(key=lambda t: t[0].sort_key)
        return cls(reference, tuple(terms))

    @classmethod
    def zero(cls, reference: MorphismModel) -> BivariantElement:
        return cls(reference, ())

    @classmethod
    def of(cls, gen: BivariantGenerator, coeff: int = 1) -> BivariantElement:
        return cls.from_terms(gen.reference, [(gen, coeff)])

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, gen: BivariantGenerator) -> int:
        return next((n for g, n in self.terms if g.key == gen.key), 0)

    def _check_reference(self, other: BivariantElement) -> None:
        if self.reference.key != other.reference.key:
            msg = f"参照射が異なります: {self.reference.render()} と {other.reference.render()}"
            raise ReferenceMismatch(msg)

    def __add__(self, other: object) -> BivariantElement:
        if not isinstance(other, BivariantElement):
            return NotImplemented
        self._check_reference(other)
        return BivariantElement.from_terms(self.reference, [*self.terms, *other.terms])

    def __neg__(self) -> BivariantElement:
        return self.scaled(-1)

    def __sub__(self, other: object) -> BivariantElement:
        if not isinstance(other, BivariantElement):
            return NotImplemented
        return self + (-other)

    def scaled(self, n: int) -> BivariantElement:
        return BivariantElement.from_terms(self.reference, [(g, c * n) for g, c in self.terms])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BivariantElement):
            return NotImplemented
        return self.reference.key == other.reference.key and [
            (g.key, n) for g, n in self.terms
        ] == [(g.key, n) for g, n in other.terms]

    def __hash__(self) -> int:
        return hash((self.reference.key, tuple((g.key, n) for g, n in self.terms)))

    def render(self) -> str:
        if not self.terms:
            return "0"
        out: list[str] = []
        for i, (gen, n) in enumerate(self.terms):
            magnitude = abs(n)
            body = gen.render() if magnitude == 1 else f"{magnitude}{gen.render()}"
            if i == 0:
                out.append(f"-{body}" if n < 0 else body)
            else:
                out.append(f" - {body}" if n < 0 else f" + {body}")
        return "".join(out)

    def to_dict(self) -> dict[str, Any]:
        return {
            "reference": self.reference.render(),
            "terms": [{"generator": g.render(), "coeff": n} for g, n in self.terms],
        }


def unit(x: VarietyModel) -> BivariantElement:
    """1_X = [X --id--> X] over id_X."""
    ident = identity(x)
    return BivariantElement.of(BivariantGenerator(ident, ident, ident.relative_tangent))


def generator_element(h: MorphismModel, f: MorphismModel, coeff: int = 1) -> BivariantElement:
    return BivariantElement.of(make_generator(h, f), coeff)


# ---------------------------------------------------------------------------
# operations


def _generator_product(
    alpha: BivariantGenerator,
    beta: BivariantGenerator,
    reference: MorphismModel,
) -> BivariantGenerator:
    """[V --p--> X] • [W --k--> Y] = [V' → X] with V' = V ×_X (X ×_Y W)."""
    sq1 = fiber_product(alpha.reference, beta.h)
    sq2 = fiber_product(alpha.h, sq1.pr_f)
    h = compose(sq1.pr_f, sq2.pr_g)
    to_w = compose(sq1.pr_g, sq2.pr_g)
    # V' → W は V → Y の底変換なので T = k''*T_{fp}、さらに W → Z の分を足す
    total = pullback_class(sq2.pr_f, alpha.tangent.total_chern) * pullback_class(
        to_w, beta.tangent.total_chern
    )
    tangent = BundleClass(h.source, alpha.tangent.rank + beta.tangent.rank, total)
    return BivariantGenerator(h, reference, tangent)


def biv_product(a: BivariantElement, b: BivariantElement) -> BivariantElement:
    """a • b for a over f: X → Y and b over g: Y → Z; the result is over g∘f."""
    f, g = a.reference, b.reference
    if f.target.key != g.source.key:
        msg = f"積が定義されません: {f.render()} と {g.render()}"
        raise ReferenceMismatch(msg)
    reference = compose(g, f)
    pairs = [
        (_generator_product(alpha, beta, reference), m * n)
        for alpha, m in a.terms
        for beta, n in b.terms
    ]
    return BivariantElement.from_terms(reference, pairs)


def biv_pushforward(
    f: MorphismModel, a: BivariantElement, g: MorphismModel
) -> BivariantElement:
    """f_* for a over g∘f; relabels [V --p--> X] as [V --f∘p--> Y] over g."""
    if not f.is_proper:
        raise NotProper(f"固有射ではありません: {f.render()}")
    expected = compose(g, f)
    if expected.key != a.reference.key:
        msg = f"参照射 {a.reference.render()} は {g.render()} ∘ {f.render()} ではありません"
        raise ReferenceMismatch(msg)
    pairs = [
        (BivariantGenerator(compose(f, gen.h), g, gen.tangent), n) for gen, n in a.terms
    ]
    return BivariantElement.from_terms(g, pairs)


def pullback_square(
    g: MorphismModel, a: BivariantElement
) -> tuple[BivariantElement, FiberSquare]:
    """g* of a over f: X → Y along g: Y' → Y, with the square X' = X ×_Y Y'."""
    square = fiber_product(a.reference, g)
    reference = square.pr_g
    pairs = []
    for gen, n in a.terms:
        inner = fiber_product(gen.h, square.pr_f)
        tangent = pullback_bundle(inner.pr_f, gen.tangent)
        pairs.append((BivariantGenerator(inner.pr_g, reference, tangent), n))
    return BivariantElement.from_terms(reference, pairs), square


def biv_pullback(g: MorphismModel, a: BivariantElement) -> BivariantElement:
    return pullback_square(g, a)[0]


def orientation_theta(f: MorphismModel) -> BivariantElement:
    """θ(f) = [X --id--> X] over a smooth f."""
    if not f.is_smooth or f.relative_tangent is None:
        raise NotSmooth(f"向き付けには滑らかな射が必要です: {f.render()}")
    return BivariantElement.of(BivariantGenerator(identity(f.source), f, f.relative_tangent))


def gysin_pull(f: MorphismModel, a: BivariantElement) -> BivariantElement:
    """f^!(a) = θ(f) • a."""
    return biv_product(orientation_theta(f), a)


def gysin_push(
    g: MorphismModel,
    a: BivariantElement,
    *,
    g_prime: MorphismModel | None = None,
    reference: MorphismModel | None = None,
) -> BivariantElement:
    """g_!(a) = g'_*(a • θ(g)).

    ``a`` lives over f': X' → Y' and g: Y' → Y. Without ``g_prime`` the
    square is the trivial one with f' = id, so the result is over id_Y.
    """
    if g_prime is None:
        if a.reference.kind is not MorphismKind.IDENTITY:
            msg = f"g' を省略できるのは恒等射の上の元だけです: {a.reference.render()}"
            raise ReferenceMismatch(msg)
        g_prime, reference = g, identity(g.target)
    if reference is None:
        raise ReferenceMismatch("g' を与えるときは参照射も必要です")
    return biv_pushforward(g_prime, biv_product(a, orientation_theta(g)), reference)


# ---------------------------------------------------------------------------
# axiom checks


def _b1(elements: Sequence[BivariantElement], morphisms: Sequence[MorphismModel]) -> tuple[Any, Any]:
    a, b, c = elements[:3]
    return biv_product(biv_product(a, b), c), biv_product(a, biv_product(b, c))


def _b2(elements, morphisms):
    (a,) = elements[:1]
    f, g = morphisms[:2]
    h = morphisms[2] if len(morphisms) > 2 else to_point(g.target)
    lhs = biv_pushforward(compose(g, f), a, h)
    rhs = biv_pushforward(g, biv_pushforward(f, a, compose(h, g)), h)
    return lhs, rhs


def _b3(elements, morphisms):
    (a,) = elements[:1]
    g, h = morphisms[:2]
    return biv_pullback(compose(g, h), a), biv_pullback(h, biv_pullback(g, a))


def _b4(elements, morphisms):
    a, b = elements[:2]
    h = morphisms[0]
    f_prime = morphisms[1] if len(morphisms) > 1 else to_point(h.target)
    lhs = biv_pushforward(h, biv_product(a, b), compose(b.reference, f_prime))
    rhs = biv_product(biv_pushforward(h, a, f_prime), b)
    return lhs, rhs


def _b5(elements, morphisms):
    a, b = elements[:2]
    g = morphisms[0]
    lhs = biv_pullback(g, biv_product(a, b))
    pulled_b, square = pullback_square(g, b)
    rhs = biv_product(biv_pullback(square.pr_f, a), pulled_b)
    return lhs, rhs


def _b6(elements, morphisms):
    (a,) = elements[:1]
    f, g = morphisms[:2]
    h = morphisms[2] if len(morphisms) > 2 else to_point(f.target)
    rhs, lower = pullback_square(g, biv_pushforward(f, a, h))
    f_prime = fiber_product(f, lower.pr_f).pr_g
    lhs = biv_pushforward(f_prime, biv_pullback(g, a), lower.pr_g)
    return lhs, rhs


def _b7(elements, morphisms):
    a, b = elements[:2]
    g = morphisms[0]
    k = morphisms[1] if len(morphisms) > 1 else to_point(g.target)
    pulled, square = pullback_square(g, a)
    lhs = biv_pushforward(square.pr_f, biv_product(pulled, b), compose(k, a.reference))
    rhs = biv_product(a, biv_pushforward(g, b, k))
    return lhs, rhs


def _units(elements, morphisms):
    (a,) = elements[:1]
    f = a.reference
    lhs = [biv_product(unit(f.source), a), biv_product(a, unit(f.target))]
    rhs = [a, a]
    for g in morphisms:
        lhs.append(biv_pullback(g, unit(g.target)))
        rhs.append(unit(g.source))
    return Sides(tuple(lhs)), Sides(tuple(rhs))


def _theta(elements, morphisms):
    f, g = morphisms[:2]
    lhs = (orientation_theta(compose(g, f)), orientation_theta(identity(f.source)))
    rhs = (biv_product(orientation_theta(f), orientation_theta(g)), unit(f.source))
    return Sides(lhs), Sides(rhs)


def _tangent_classes(a: BivariantElement) -> tuple[str, ...]:
    return tuple(gen.tangent.total_chern.render() for gen, _ in a.terms)


def _theta_stability(elements, morphisms):
    f, g = morphisms[:2]
    square = fiber_product(f, g)
    lhs = orientation_theta(square.pr_g)
    rhs = biv_pullback(g, orientation_theta(f))
    return (
        Sides((lhs, *_tangent_classes(lhs))),
        Sides((rhs, *_tangent_classes(rhs))),
    )


def _commutativity(elements, morphisms):
    a, b = elements[:2]
    lhs = biv_product(biv_pullback(b.reference, a), b)
    rhs = biv_product(biv_pullback(a.reference, b), a)
    return lhs, rhs


_CHECKS = {
    "B-1": _b1,
    "B-2": _b2,
    "B-3": _b3,
    "B-4": _b4,
    "B-5": _b5,
    "B-6": _b6,
    "B-7": _b7,
    "units": _units,
    "theta": _theta,
    "theta-stability": _theta_stability,
    "commutativity": _commutativity,
}


def check_axiom(
    code: str,
    elements: Sequence[BivariantElement] = (),
    morphisms: Sequence[MorphismModel] = (),
) -> CheckReport:
    """Evaluate both sides of one axiom on the given elements and morphisms.

    B-1 (a, b, c): (a•b)•c = a•(b•c).
    B-2 (a; f, g[, h]): (g∘f)_* a = g_* f_* a.
    B-3 (a; g, h): (g∘h)* a = h* g* a.
    B-4 (a, b; h[, f']): h_*(a•b) = h_*(a)•b.
    B-5 (a, b; g): g*(a•b) = g'*(a)•g*(b).
    B-6 (a; f, g[, h]): f'_*(g* a) = g*(f_* a).
    B-7 (a, b; g[, k]): g'_*(g* a • b) = a • g_* b.
    Omitted trailing morphisms default to maps to the point.
    """
    if code not in _CHECKS:
        raise ValueError(f"未知の公理コードです: {code}")
    inputs = {
        "elements": [e.render() for e in elements],
        "morphisms": [m.render() for m in morphisms],
    }

    def body() -> CheckReport:
        lhs, rhs = _CHECKS[code](elements, morphisms)
        return compare(code, inputs, lhs, rhs, informational=code == "commutativity")

    return guarded(code, inputs, body)
