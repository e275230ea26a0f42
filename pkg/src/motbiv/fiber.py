"""Fiber products of structural morphisms.

A square for ``f: X → Y`` and ``g: W → Y`` is returned as a
:class:`FiberSquare` with ``pr_f: X' → X`` and ``pr_g: X' → W``. Each apex
generator is recorded as ``pr_f*(a) + pr_g*(b)``; squares are pasted and
maps into an apex are induced through these lifts.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, replace

from motbiv.errors import UnsupportedFiberProduct
from motbiv.exactalg import GradedClass
from motbiv.varmodel import (
    EMBEDDING_KINDS,
    Construction,
    MorphismKind,
    MorphismModel,
    VarietyModel,
    blow_down,
    bundle_structure,
    component_generator,
    compose,
    declare_smooth,
    exceptional_inclusion,
    exceptional_projection,
    exceptional_structure,
    identity,
    linear_embedding,
    make_blowup_linear,
    make_proj,
    product_layout,
    projection,
    pullback_bundle,
    pullback_class,
    structural_morphism,
)

logger = logging.getLogger(__name__)

MAX_DEPTH = 12

Lift = tuple[GradedClass, GradedClass]


@dataclass(frozen=True, eq=False)
class FiberSquare:
    """X' = X ×_Y W with its two projections.

    ``transverse`` is False for squares with excess intersection.
    """

    apex: VarietyModel
    pr_f: MorphismModel
    pr_g: MorphismModel
    lifts: tuple[Lift, ...]
    transverse: bool = True

    def __iter__(self) -> Iterator[VarietyModel | MorphismModel]:
        yield self.apex
        yield self.pr_f
        yield self.pr_g

    def swapped(self) -> FiberSquare:
        return FiberSquare(
            self.apex,
            self.pr_g,
            self.pr_f,
            tuple((b, a) for a, b in self.lifts),
            self.transverse,
        )

    def induced_images(self, to_f: MorphismModel, to_g: MorphismModel) -> list[GradedClass]:
        """Pullback images of the apex generators under the map (to_f, to_g)."""
        return [pullback_class(to_f, a) + pullback_class(to_g, b) for a, b in self.lifts]


def fiber_product(f: MorphismModel, g: MorphismModel) -> FiberSquare:
    """X ×_Y W for f: X → Y and g: W → Y within the constructive class."""
    if f.target.key != g.target.key:
        msg = f"終域が一致しません: {f.target.key} と {g.target.key}"
        raise UnsupportedFiberProduct(msg)
    square = _fiber_product(f, g, 0)
    logger.debug(
        "ファイバー積: %s ×_%s %s = %s",
        f.source.key,
        f.target.key,
        g.source.key,
        square.apex.key,
    )
    return square


def _fiber_product(f: MorphismModel, g: MorphismModel, depth: int) -> FiberSquare:
    if depth > MAX_DEPTH:
        msg = f"ファイバー積の再帰が深すぎます: {f.render()} / {g.render()}"
        raise UnsupportedFiberProduct(msg)
    if f.target.is_point:
        return _over_point(f, g)
    if f.kind is MorphismKind.IDENTITY:
        lifts = [(f.source.zero(), g.source.gen(name)) for name in g.source.generators]
        return _assemble(f, g, g.source, lifts, known_f=g, known_g=identity(g.source))
    if g.kind is MorphismKind.IDENTITY:
        lifts = [(f.source.gen(name), g.source.zero()) for name in f.source.generators]
        return _assemble(f, g, f.source, lifts, known_f=identity(f.source), known_g=f)

    for first, second, flipped in ((f, g, False), (g, f, True)):
        if first.kind is MorphismKind.PRODUCT_PROJECTION:
            square = _along_product_projection(first, second)
        elif first.kind is MorphismKind.BUNDLE_PROJECTION:
            square = _along_bundle_projection(first, second)
        elif first.kind is MorphismKind.BLOW_DOWN and second.kind in EMBEDDING_KINDS:
            square = _along_blow_down(first, second)
        else:
            continue
        return square.swapped() if flipped else square

    if (
        f.kind in EMBEDDING_KINDS
        and g.kind in EMBEDDING_KINDS
        and f.target.construction is Construction.PROJ
    ):
        return _linear_sections(f, g)
    if f.kind is MorphismKind.ZERO_SECTION and f == g:
        return _self_intersection(f, g)

    for first, second, flipped in ((f, g, False), (g, f, True)):
        if first.kind is MorphismKind.BASE_CHANGE:
            square = _through_base_change(first, second, depth)
        elif first.kind is MorphismKind.COMPOSITE:
            square = _through_composite(first, second, depth)
        else:
            continue
        return square.swapped() if flipped else square

    msg = f"構成的クラスで表せないファイバー積です: {f.render()} / {g.render()}"
    raise UnsupportedFiberProduct(msg)


def _assemble(
    f: MorphismModel,
    g: MorphismModel,
    apex: VarietyModel,
    lifts: Sequence[Lift],
    *,
    images_f: Sequence[GradedClass] = (),
    known_f: MorphismModel | None = None,
    known_g: MorphismModel | None = None,
    transverse: bool = True,
) -> FiberSquare:
    pr_f = known_f
    if pr_f is None:
        pr_f = structural_morphism(
            apex, f.source, images_f, kind=MorphismKind.BASE_CHANGE, parts=(g, f)
        )
    pr_g = known_g
    if pr_g is None:
        raise UnsupportedFiberProduct("ファイバー積の射影が構成されていません")
    # 安定性: 底変換は滑らかさと相対接束の引き戻しを継承する
    if f.is_smooth and not pr_g.is_smooth:
        assert f.relative_tangent is not None
        pr_g = declare_smooth(pr_g, pullback_bundle(pr_f, f.relative_tangent))
    if g.is_smooth and not pr_f.is_smooth:
        assert g.relative_tangent is not None
        pr_f = declare_smooth(pr_f, pullback_bundle(pr_g, g.relative_tangent))
    draft = FiberSquare(apex, pr_f, pr_g, tuple(lifts), transverse)
    if pr_g.kind is MorphismKind.BASE_CHANGE and pr_g.square is None:
        pr_g = replace(pr_g, square=draft)
    if pr_f.kind is MorphismKind.BASE_CHANGE and pr_f.square is None:
        pr_f = replace(pr_f, square=draft.swapped())
    return FiberSquare(apex, pr_f, pr_g, tuple(lifts), transverse)


def _over_point(f: MorphismModel, g: MorphismModel) -> FiberSquare:
    x, w = f.source, g.source
    apex, positions = product_layout(x, w)
    lifts: list[Lift] = []
    for p, comp in enumerate(apex.components()):
        for name in comp.generators:
            if p in positions[0]:
                i = positions[0].index(p)
                lifts.append((x.gen(component_generator(x, i, name)), w.zero()))
            else:
                i = positions[1].index(p)
                lifts.append((x.zero(), w.gen(component_generator(w, i, name))))
    return _assemble(
        f,
        g,
        apex,
        lifts,
        known_f=projection(apex, positions[0]),
        known_g=projection(apex, positions[1]),
    )


def _along_product_projection(f: MorphismModel, g: MorphismModel) -> FiberSquare:
    """(A × B → A) pulled back along W → A is W × B."""
    x, w, base = f.source, g.source, f.target
    comps = x.components()
    kept = list(f.positions)
    rest = [k for k in range(len(comps)) if k not in kept]
    apex, positions = product_layout(w, *(comps[k] for k in rest))
    pr_g = projection(apex, positions[0])
    images_f: list[GradedClass] = []
    for k, comp in enumerate(comps):
        for name in comp.generators:
            if k in kept:
                on_base = base.gen(component_generator(base, kept.index(k), name))
                images_f.append(pullback_class(pr_g, pullback_class(g, on_base)))
            else:
                p = positions[1 + rest.index(k)][0]
                images_f.append(apex.gen(component_generator(apex, p, name)))
    lifts: list[Lift] = []
    for p, comp in enumerate(apex.components()):
        for name in comp.generators:
            if p in positions[0]:
                i = positions[0].index(p)
                lifts.append((x.zero(), w.gen(component_generator(w, i, name))))
            else:
                i = next(j for j in range(len(rest)) if positions[1 + j][0] == p)
                lifts.append((x.gen(component_generator(x, rest[i], name)), w.zero()))
    return _assemble(f, g, apex, lifts, images_f=images_f, known_g=pr_g)


def _along_bundle_projection(f: MorphismModel, g: MorphismModel) -> FiberSquare:
    """P(E) → Y pulled back along W → Y is P(g*E)."""
    assert f.bundle is not None and f.zeta is not None
    x, w = f.source, g.source
    structure = bundle_structure(w, pullback_bundle(g, f.bundle))
    apex = structure.variety
    images_f = [
        (structure.zeta if a else apex.zero())
        + pullback_class(structure.projection, pullback_class(g, b))
        for a, b in f.decomposition
    ]
    lifts = [(f.zeta if a else x.zero(), b) for a, b in structure.decomposition]
    return _assemble(f, g, apex, lifts, images_f=images_f, known_g=structure.projection)


def _along_blow_down(f: MorphismModel, g: MorphismModel) -> FiberSquare:
    """Bl_{P^m} P^n → P^n pulled back along a linear P^k ⊂ P^n.

    A general P^k meets the center in P^{m+k-n}; its preimage is the blow-up
    of P^k along that intersection, or P^k itself when it misses the center.
    The center itself pulls back to the exceptional divisor.
    """
    x, w = f.source, g.source
    n, m = x.params
    k = w.dim
    if g.kind is MorphismKind.CENTER_EMBEDDING and k == m:
        structure = exceptional_structure(n, m)
        lifts = [((-x.gen("e")) if a else x.zero(), b) for a, b in structure.decomposition]
        return _assemble(
            f,
            g,
            structure.variety,
            lifts,
            known_f=exceptional_inclusion(n, m),
            known_g=exceptional_projection(n, m),
            transverse=False,
        )
    meet = m + k - n
    if meet < 0:
        apex = make_proj(k)
        images_f = [apex.gen("h") if k > 0 else apex.zero(), apex.zero()]
        lifts = [(x.zero(), w.gen("h"))] if k > 0 else []
        return _assemble(f, g, apex, lifts, images_f=images_f, known_g=identity(apex))
    apex = make_blowup_linear(k, meet)
    images_f = [apex.gen("h"), apex.gen("e")]
    lifts = [(x.zero(), w.gen("h")), (x.gen("e"), w.zero())]
    return _assemble(f, g, apex, lifts, images_f=images_f, known_g=blow_down(k, meet))


def _linear_sections(f: MorphismModel, g: MorphismModel) -> FiberSquare:
    """Two general linear subspaces of P^n meet in P^{a+b-n}."""
    a, b, n = f.source.dim, g.source.dim, f.target.dim
    d = a + b - n
    if d < 0:
        msg = f"線形部分空間が交わりません: P({a}) と P({b}) in P({n})"
        raise UnsupportedFiberProduct(msg)
    apex = make_proj(d)
    lifts = [(f.source.gen("h"), g.source.zero())] if d > 0 else []
    return _assemble(
        f,
        g,
        apex,
        lifts,
        known_f=linear_embedding(d, a),
        known_g=linear_embedding(d, b),
    )


def _self_intersection(f: MorphismModel, g: MorphismModel) -> FiberSquare:
    """A section against itself: the base with identities, with excess."""
    x = f.source
    lifts = [(x.gen(name), x.zero()) for name in x.generators]
    return _assemble(
        f, g, x, lifts, known_f=identity(x), known_g=identity(x), transverse=False
    )


def _split_degree_one(
    cls: GradedClass,
    variety: VarietyModel,
    lifts: Sequence[Lift],
    zero_a: GradedClass,
    zero_b: GradedClass,
) -> Lift:
    """Rewrite a degree-1 class on an apex through that apex's lifts."""
    a, b = zero_a, zero_b
    for idx, coeff in enumerate(cls.component(1)):
        if coeff.is_zero():
            continue
        mono = variety.ring.basis[1][idx]
        la, lb = lifts[mono.index(1)]
        a = a + la.scaled(coeff)
        b = b + lb.scaled(coeff)
    return a, b


def _through_base_change(f: MorphismModel, g: MorphismModel, depth: int) -> FiberSquare:
    """f is the base change of φ along ψ, so X ×_Y W = X0 ×_{Y0} W."""
    base_square = f.square
    if base_square is None:
        raise UnsupportedFiberProduct(f"底変換の元の図式がありません: {f.render()}")
    phi, psi = f.parts
    outer = _fiber_product(phi, compose(psi, g), depth + 1)
    images_f = base_square.induced_images(outer.pr_f, compose(g, outer.pr_g))
    lifts = [(pullback_class(base_square.pr_f, a), b) for a, b in outer.lifts]
    return _assemble(
        f,
        g,
        outer.apex,
        lifts,
        images_f=images_f,
        known_g=outer.pr_g,
        transverse=outer.transverse and base_square.transverse,
    )


def _through_composite(f: MorphismModel, g: MorphismModel, depth: int) -> FiberSquare:
    """Paste the squares of f = f2 ∘ f1 along g."""
    f1, f2 = f.parts
    lower = _fiber_product(f2, g, depth + 1)
    upper = _fiber_product(f1, lower.pr_f, depth + 1)
    middle = lower.apex
    lifts: list[Lift] = []
    for a1, c1 in upper.lifts:
        a2, b2 = _split_degree_one(
            c1, middle, lower.lifts, f1.target.zero(), g.source.zero()
        )
        lifts.append((a1 + pullback_class(f1, a2), b2))
    return _assemble(
        f,
        g,
        upper.apex,
        lifts,
        known_f=upper.pr_f,
        known_g=compose(lower.pr_g, upper.pr_g),
        transverse=upper.transverse and lower.transverse,
    )
