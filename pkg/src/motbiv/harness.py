"""Seeded scenario generation and suite execution.

Randomness comes from SplitMix64 only::

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)

all modulo 2^64, so a seed fixes the scenario on every platform.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

from motbiv.bivariant import (
    AXIOM_CODES,
    CHECK_CODES,
    BivariantElement,
    check_axiom,
    generator_element,
    orientation_theta,
    unit,
)
from motbiv.config import BUDGET_CEILING
from motbiv.errors import InvalidParameters, MotbivError
from motbiv.expr import ProjBundleExpr, evaluate, evaluate_bundle, parse_expr
from motbiv.genus import series_named
from motbiv.motivic import (
    BlowupDiagram,
    blowup_relation_element,
    check_genus_shadow,
    check_point_restriction,
    check_product_closure,
    find_witness,
    k0_project,
    linear_blowup_diagram,
    point_specialization_pair,
    relative_blowup_diagram,
    witnessed_equal,
)
from motbiv.report import CheckReport, ReportTally, Status, compare
from motbiv.scenario import CheckSpec, Scenario
from motbiv.transforms import (
    LAW_TRANSFORMATIONS,
    check_blowup_vanishing,
    covariant_agreement_check,
    genus_consistency_check,
    law_product,
    law_pullback,
    law_pushforward,
    module_property_check,
    module_property_class_check,
    sga6_rr_check,
    specialization_check,
    transformation_named,
    triangle_check,
    verdier_rr_check,
)
from motbiv.varmodel import (
    Construction,
    MorphismModel,
    VarietyModel,
    blow_down,
    blowup_oracles,
    bundle_projection,
    bundle_structure,
    corrupt_push_table,
    exceptional_inclusion,
    identity,
    linear_embedding,
    make_point,
    make_proj,
    point_inclusion,
    product_layout,
    projection,
    relative_tangent,
    tangent_bundle,
    to_point,
)

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB

SUITE_KINDS = ("axioms", "blowup", "rr", "all")
RR_SERIES = ("todd", "chern", "hirzebruch")
VANISHING_SERIES = ("todd", "chern", "lclass", "hirzebruch")

# 生成に使う多様体 (次元, ランクで絞り込む)
CATALOGUE = (
    "P(1)",
    "P(2)",
    "P(3)",
    "prod(P(1),P(1))",
    "prod(P(1),P(2))",
    "projbundle(P(1);h,0)",
    "projbundle(P(1);2*h,0)",
    "blowup(P(2),P(0))",
    "blowup(P(3),P(1))",
)


class SplitMix64:
    """The split-mix 64-bit generator."""

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX_1) & MASK64
        z = ((z ^ (z >> 27)) * MIX_2) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise InvalidParameters(f"範囲が空です: {n}")
        return self.next_u64() % n

    def choice(self, items: Sequence[Any]) -> Any:
        return items[self.below(len(items))]

    def coefficient(self) -> int:
        return self.choice((-2, -1, 1, 2))


@dataclass(frozen=True)
class Budget:
    """Caps on scenario size: dimension, reference chain length and bundle rank."""

    max_dim: int = 3
    max_chain: int = 3
    max_rank: int = 3

    def __post_init__(self) -> None:
        for name in ("max_dim", "max_chain", "max_rank"):
            value = getattr(self, name)
            if not 0 <= value <= BUDGET_CEILING:
                raise InvalidParameters(f"{name} は 0..{BUDGET_CEILING}: {value}")

    @classmethod
    def zero(cls) -> Budget:
        return cls(0, 0, 0)


# ---------------------------------------------------------------------------
# generation


class _Builder:
    """Appends to a scenario and hands back indices."""

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario

    def space(self, x: VarietyModel) -> int:
        for i, known in enumerate(self.scenario.spaces):
            if known.key == x.key:
                return i
        self.scenario.spaces.append(x)
        return len(self.scenario.spaces) - 1

    def morphism(self, m: MorphismModel) -> int:
        self.space(m.source)
        self.space(m.target)
        self.scenario.morphisms.append(m)
        return len(self.scenario.morphisms) - 1

    def element(self, a: BivariantElement) -> int:
        self.morphism(a.reference)
        self.scenario.elements.append(a)
        return len(self.scenario.elements) - 1

    def check(self, code: str, elements: Sequence[int] = (), morphisms: Sequence[int] = (), **params: Any) -> None:
        spec = CheckSpec(code, tuple(elements), tuple(morphisms), params=params)
        self.scenario.script.append(spec)


def _special_map(rng: SplitMix64, text: str, x: VarietyModel) -> MorphismModel:
    """A proper map out of or into ``x`` typical for its construction."""
    match x.construction:
        case Construction.PROJ:
            k = rng.below(x.dim)
            return linear_embedding(k, x.dim)
        case Construction.PRODUCT:
            return projection(x, [rng.below(len(x.components()))])
        case Construction.PROJBUNDLE:
            expr = parse_expr(text)
            assert isinstance(expr, ProjBundleExpr)
            base, bundle = evaluate_bundle(expr)
            return bundle_projection(bundle_structure(base, bundle))
        case Construction.BLOWUP:
            n, m = x.params
            return rng.choice((blow_down(n, m), exceptional_inclusion(n, m)))
    return identity(x)


def _over_point(x: VarietyModel, maps: Iterable[MorphismModel], rng: SplitMix64) -> BivariantElement:
    """θ(X → pt) plus random multiples of the given generators over X → pt."""
    reference = to_point(x)
    element = orientation_theta(reference)
    for h in maps:
        element = element + generator_element(h, reference, rng.coefficient())
    if element.is_zero():
        element = orientation_theta(reference)
    return element


def _point_scenario(seed: int, kinds: Sequence[str]) -> Scenario:
    scenario = Scenario(seed=seed)
    build = _Builder(scenario)
    pt = make_point()
    build.space(pt)
    m = build.morphism(identity(pt))
    u = build.element(unit(pt))
    if "axioms" in kinds:
        build.check("B-1", (u, u, u))
        build.check("units", (u,), (m,))
        build.check("triangle", (u,))
        scenario.script.append(CheckSpec("genus-consistency", spaces=(0,)))
    return scenario


def generate(seed: int, budget: Budget | None = None, *, kinds: Sequence[str] = ("axioms",)) -> Scenario:
    """The scenario for ``seed``; identical seeds give identical scenarios."""
    budget = budget or Budget()
    rng = SplitMix64(seed)
    # X × P(1) も上限に収める
    candidates = [
        text
        for text in CATALOGUE
        if (x := evaluate(parse_expr(text))).dim + 1 <= budget.max_dim
        and (x.construction is not Construction.PROJBUNDLE or budget.max_rank >= 2)
    ]
    if not candidates:
        return _point_scenario(seed, kinds)

    text = rng.choice(candidates)
    x = evaluate(parse_expr(text))
    fiber = make_proj(1)
    xf, positions = product_layout(x, fiber)
    p = projection(xf, positions[0])
    special = _special_map(rng, text, x)
    source = special.source

    scenario = Scenario(seed=seed)
    build = _Builder(scenario)
    pt = make_point()
    build.space(pt)
    build.space(x)

    extras = [point_inclusion(x)]
    if x.construction is Construction.BLOWUP:
        extras.append(exceptional_inclusion(*x.params))
    elif x.construction is Construction.PROJ and x.dim >= 2:
        extras.append(linear_embedding(1, x.dim))
    a = build.element(_over_point(x, extras, rng))
    b = build.element(unit(pt) + generator_element(to_point(fiber), identity(pt), rng.coefficient()))
    c = build.element(generator_element(to_point(fiber), identity(pt)))
    theta_p = build.element(orientation_theta(p))
    a_s = build.element(_over_point(source, [point_inclusion(source)], rng))
    a_f = build.element(orientation_theta(to_point(fiber)))

    m_special = build.morphism(special)
    m_target = build.morphism(to_point(special.target))
    m_fiber = build.morphism(to_point(fiber))
    m_point = build.morphism(point_inclusion(x))
    m_p = build.morphism(p)
    m_x = build.morphism(to_point(x))
    ff, ff_positions = product_layout(fiber, fiber)
    m_ff = build.morphism(rng.choice((projection(ff, ff_positions[0]), point_inclusion(fiber))))
    m_id = build.morphism(identity(x))

    if "axioms" in kinds:
        if budget.max_chain >= 3:
            build.check("B-1", (theta_p, a, b))
        else:
            build.check("B-1", (a, b, c))
        if budget.max_chain >= 2:
            build.check("B-2", (a_s,), (m_special, m_target))
            build.check("B-3", (a,), (m_fiber, m_ff))
            build.check("B-6", (a_s,), (m_special, m_fiber))
        build.check("B-4", (a_s, b), (m_special,))
        build.check("B-5", (theta_p, a), (m_fiber,))
        build.check("B-7", (theta_p, b), (m_point,))
        build.check("units", (a,), (m_special, m_fiber, m_point, m_id))
        build.check("theta", (), (m_p, m_x))
        build.check("theta-stability", (), (m_x, m_fiber))
        build.check("theta-stability", (), (m_p, m_point))
        build.check("commutativity", (a, a_f))
        for name in LAW_TRANSFORMATIONS:
            build.check("law-product", (a, b), transform=name)
            build.check("law-product", (theta_p, a), transform=name)
            build.check("law-pushforward", (a_s,), (m_special, m_target), transform=name)
            build.check("law-pullback", (a,), (m_fiber,), transform=name)
            build.check("law-pullback", (theta_p,), (m_point,), transform=name)
        build.check("triangle", (a, theta_p, a_s))
        build.check("covariant-agreement", (a, a_s))
        scenario.script.append(CheckSpec("genus-consistency", spaces=(1,)))
        scenario.script.append(
            CheckSpec("specialization", morphisms=(m_p,), spaces=tuple(range(len(scenario.spaces))))
        )

    if "rr" in kinds:
        smooth = [m_p]
        if special.is_smooth:
            smooth.append(m_special)
        for m_index in smooth:
            f = scenario.morphisms[m_index]
            a_y = build.element(_over_point(f.target, [point_inclusion(f.target)], rng))
            for series in RR_SERIES:
                build.check("verdier-rr", (a_y,), (m_index,), series=series)
            if f.source.dim + fiber.dim > budget.max_dim:
                continue
            src_f, src_positions = product_layout(f.source, fiber)
            over_id = build.element(
                unit(f.source) + generator_element(projection(src_f, src_positions[0]), identity(f.source))
            )
            for series in RR_SERIES:
                build.check("sga6-rr", (over_id,), (m_index,), series=series)
        xf_over_x = projection(xf, positions[0])
        betas = [
            build.element(unit(x)),
            build.element(generator_element(xf_over_x, identity(x), rng.coefficient())),
        ]
        alphas = [a, build.element(generator_element(point_inclusion(x), to_point(x)))]
        for series in RR_SERIES:
            for beta in betas:
                for alpha in alphas:
                    build.check("module-property", (beta, alpha), series=series)
            build.check("module-property-class", (a,), series=series)

    logger.debug("シナリオ生成: seed=%d, X=%s", seed, x.key)
    return scenario


# ---------------------------------------------------------------------------
# execution


@dataclass
class SuiteSummary:
    """Counts for one scenario or suite; ``failures`` carry full inputs."""

    seed: int
    executed: int = 0
    passed: int = 0
    failed: int = 0
    unsupported: int = 0
    failures: list[CheckReport] = field(default_factory=list)
    observations: list[CheckReport] = field(default_factory=list)
    coverage: Counter[str] = field(default_factory=Counter)

    @classmethod
    def from_reports(cls, seed: int, reports: Iterable[CheckReport]) -> SuiteSummary:
        tally = ReportTally()
        coverage: Counter[str] = Counter()
        for report in reports:
            tally.add(report)
            if report.status is not Status.UNSUPPORTED:
                coverage[report.check] += 1
        return cls(
            seed,
            tally.executed,
            tally.passed,
            tally.failed,
            tally.unsupported,
            tally.failures,
            tally.observations,
            coverage,
        )

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "executed": self.executed,
            "passed": self.passed,
            "failed": self.failed,
            "unsupported": self.unsupported,
            "failures": [r.to_dict() for r in self.failures],
        }


def _failure(spec: CheckSpec, error: Exception) -> CheckReport:
    logger.warning("検査中に例外: %s: %s", spec.code, error)
    return CheckReport(spec.code, spec.to_dict(), "", "", Status.FAIL, detail=str(error))


def _reports_for(spec: CheckSpec, scenario: Scenario) -> list[CheckReport]:
    elements = [scenario.elements[i] for i in spec.elements]
    morphisms = [scenario.morphisms[i] for i in spec.morphisms]
    spaces = [scenario.spaces[i] for i in spec.spaces]
    params = spec.params
    code = spec.code
    if code in CHECK_CODES:
        return [check_axiom(code, elements, morphisms)]
    if code == "genus-consistency":
        return [genus_consistency_check(x) for x in spaces or scenario.spaces]
    if code == "specialization":
        bundles = [tangent_bundle(x) for x in spaces or scenario.spaces if not x.is_point]
        bundles.extend(relative_tangent(m) for m in morphisms if m.is_smooth)
        return [r for e in bundles for r in specialization_check(e)]
    if code == "triangle":
        return [r for a in elements or scenario.elements for r in triangle_check(a)]
    if code == "covariant-agreement":
        targets = elements or scenario.elements
        return [covariant_agreement_check(a) for a in targets if a.reference.target.is_point]
    if code.startswith("law-"):
        t = transformation_named(params.get("transform", "ty"))
        if code == "law-product":
            return [law_product(t, elements[0], elements[1])]
        if code == "law-pushforward":
            return [law_pushforward(t, morphisms[0], elements[0], morphisms[1])]
        return [law_pullback(t, morphisms[0], elements[0])]
    q = series_named(params.get("series", "todd"), 1)
    if code == "verdier-rr":
        return [verdier_rr_check(morphisms[0], q, elements[0])]
    if code == "sga6-rr":
        return [sga6_rr_check(morphisms[0], q, elements[0])]
    if code == "module-property":
        return [module_property_check(elements[0], elements[1], q)]
    if code == "module-property-class":
        reports = []
        for alpha in elements:
            x = alpha.reference.source
            for beta in (x.one(), *(x.gen(g) for g in x.generators)):
                reports.append(module_property_class_check(beta, alpha, q))
        return reports
    if code == "blowup":
        base = scenario.spaces[params["base"]] if "base" in params else None
        return blowup_reports(params["n"], params["m"], base=base)
    raise InvalidParameters(f"未知の検査です: {code}")


def run_suite(scenario: Scenario) -> SuiteSummary:
    """Run every check of the scenario script; unsupported squares are counted, not failed."""
    reports: list[CheckReport] = []
    for spec in scenario.script:
        try:
            reports.extend(_reports_for(spec, scenario))
        except MotbivError as e:
            reports.append(_failure(spec, e))
    summary = SuiteSummary.from_reports(scenario.seed, reports)
    logger.info(
        "seed=%d: 実行 %d, 成功 %d, 失敗 %d, 対象外 %d",
        summary.seed,
        summary.executed,
        summary.passed,
        summary.failed,
        summary.unsupported,
    )
    return summary


# ---------------------------------------------------------------------------
# blow-up suite


def _oracle_reports(n: int, m: int) -> list[CheckReport]:
    reports = []
    for result in blowup_oracles(n, m):
        status = Status.PASS if result.passed else Status.FAIL
        inputs = {"n": n, "m": m}
        reports.append(CheckReport(f"oracle:{result.name}", inputs, result.lhs, result.rhs, status))
    return reports


def _witness_report(d: BlowupDiagram) -> CheckReport:
    """rbl(d) is 0 in K0 with itself as the witness."""
    relation = blowup_relation_element(d)
    zero = k0_project(BivariantElement.zero(d.reference))
    witness = find_witness(relation.element, [relation])
    found = witness is not None and witnessed_equal(k0_project(relation.element), zero, witness)
    coefficients = [n for _, n in witness] if witness is not None else None
    return compare("k0-witness", {"diagram": d.render()}, (found, coefficients), (True, [1]))


def diagram_reports(d: BlowupDiagram) -> list[CheckReport]:
    """Vanishing for every transformation, the genus shadow and the K0 witness."""
    reports = [check_blowup_vanishing(d, which) for which in ("lambda", "ty")]
    for name in VANISHING_SERIES:
        reports.append(check_blowup_vanishing(d, "gamma", series_named(name, d.bl.dim)))
    shadow = check_genus_shadow(d)
    if d.reference.target.is_point:
        _, description = point_specialization_pair(d)
        shadow = replace(shadow, detail=description)
    reports.append(shadow)
    reports.append(_witness_report(d))
    return reports


def blowup_reports(
    n: int, m: int, *, base: VarietyModel | None = None, corrupt: bool = False
) -> list[CheckReport]:
    """Oracles first, then the absolute and relative diagrams of Bl_{P^m} P^n."""
    reports = _oracle_reports(n, m)
    absolute = linear_blowup_diagram(n, m)
    if corrupt:
        absolute = replace(absolute, blowup=corrupt_push_table(absolute.blowup))
    relative = relative_blowup_diagram(base or make_proj(1), n, m)
    for d in (absolute, relative):
        reports.extend(diagram_reports(d))
    reports.append(check_product_closure(absolute, make_proj(1)))
    reports.append(check_point_restriction(relative))
    return reports


def run_blowup_suite(
    n: int, m: int, *, base: VarietyModel | None = None, corrupt: bool = False
) -> SuiteSummary:
    return SuiteSummary.from_reports(0, blowup_reports(n, m, base=base, corrupt=corrupt))


# ---------------------------------------------------------------------------
# many seeds


@dataclass
class RunResult:
    """Per-seed summaries, sorted by seed, and their totals."""

    summaries: list[SuiteSummary]
    extra: list[SuiteSummary] = field(default_factory=list)

    def _all(self) -> list[SuiteSummary]:
        return [*self.summaries, *self.extra]

    @property
    def failed(self) -> int:
        return sum(s.failed for s in self._all())

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def coverage_warning(self) -> str | None:
        """Axioms exercised less than once per 100 scenarios, if any."""
        if not self.summaries:
            return None
        needed = max(1, len(self.summaries) // 100)
        counts: Counter[str] = Counter()
        for s in self.summaries:
            counts.update(s.coverage)
        missing = [code for code in AXIOM_CODES if counts[code] < needed]
        if not missing:
            return None
        return f"網羅不足の公理: {', '.join(missing)}"

    def to_dict(self) -> dict[str, Any]:
        everything = self._all()
        observations = [r.to_dict() for s in everything for r in s.observations]
        return {
            "scenarios": len(self.summaries),
            "executed": sum(s.executed for s in everything),
            "passed": sum(s.passed for s in everything),
            "failed": self.failed,
            "unsupported": sum(s.unsupported for s in everything),
            "coverage_warning": self.coverage_warning(),
            "observations": len(observations),
            "summaries": [s.to_dict() for s in self.summaries],
            "suites": [s.to_dict() for s in self.extra],
        }


def run_seed(seed: int, budget: Budget, kinds: Sequence[str]) -> SuiteSummary:
    return run_suite(generate(seed, budget, kinds=kinds))


def run_seeds(
    seeds: Iterable[int],
    budget: Budget | None = None,
    kinds: Sequence[str] = ("axioms",),
    workers: int = 1,
) -> RunResult:
    """Run generated scenarios, in parallel when ``workers`` > 1."""
    budget = budget or Budget()
    seeds = list(seeds)
    kinds = tuple(kinds)
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(run_seed, seeds, [budget] * len(seeds), [kinds] * len(seeds)))
    else:
        summaries = [run_seed(seed, budget, kinds) for seed in seeds]
    summaries.sort(key=lambda s: s.seed)
    result = RunResult(summaries)
    warning = result.coverage_warning()
    if warning:
        logger.warning(warning)
    return result


def run_check(
    kind: str,
    *,
    seed: int = 0,
    cases: int = 100,
    n: int = 2,
    m: int = 0,
    budget: Budget | None = None,
    workers: int = 1,
    corrupt: bool = False,
) -> RunResult:
    """The suites behind ``motbiv check KIND``."""
    if kind not in SUITE_KINDS:
        raise InvalidParameters(f"未知のスイートです: {kind}")
    if cases < 0:
        raise InvalidParameters(f"cases は 0 以上: {cases}")
    seeds = range(seed, seed + cases)
    if kind == "blowup":
        return RunResult([], [run_blowup_suite(n, m, corrupt=corrupt)])
    if kind == "axioms":
        return run_seeds(seeds, budget, ("axioms",), workers)
    if kind == "rr":
        return run_seeds(seeds, budget, ("rr",), workers)
    result = run_seeds(seeds, budget, ("axioms", "rr"), workers)
    result.extra.extend(run_blowup_suite(bn, bm, corrupt=corrupt) for bn, bm in ((2, 0), (3, 1)))
    return result
