"""Scenarios: spaces, morphisms, elements and the checks to run on them.

A scenario file is JSON with ``"version": 1``::

    {
      "version": 1,
      "spaces": ["P(2)", "pt"],
      "morphisms": [{"kind": "to_point", "src": 0}, {"kind": "point_inclusion", "dst": 0}],
      "elements": [{"reference": 0, "terms": [{"map": 1, "coeff": 1}]}],
      "checks": ["genus-consistency", {"check": "blowup", "n": 2, "m": 0}]
    }

Morphisms and elements refer to earlier entries by index.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from motbiv.bivariant import (
    CHECK_CODES,
    BivariantElement,
    make_generator,
    orientation_theta,
    unit,
)
from motbiv.errors import MotbivError, SchemaError
from motbiv.expr import ProjBundleExpr, evaluate, evaluate_bundle, parse_expr
from motbiv.genus import SERIES_NAMES
from motbiv.varmodel import (
    MorphismModel,
    VarietyModel,
    blow_down,
    bundle_projection,
    bundle_structure,
    center_embedding,
    compose,
    exceptional_inclusion,
    exceptional_projection,
    identity,
    linear_embedding,
    point_inclusion,
    projection,
    to_point,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# 空間ごと・元ごとに適用できる検査 (文字列だけで書ける)
SPACE_CHECKS = ("genus-consistency", "specialization")
ELEMENT_CHECKS = ("triangle", "covariant-agreement")
LAW_CHECKS = ("law-product", "law-pushforward", "law-pullback")
RR_CHECKS = ("verdier-rr", "sga6-rr", "module-property", "module-property-class")
SUITE_CHECKS = ("blowup",)
KNOWN_CHECKS = (*CHECK_CODES, *SPACE_CHECKS, *ELEMENT_CHECKS, *LAW_CHECKS, *RR_CHECKS, *SUITE_CHECKS)

# 検査ごとに必要な (元, 射) の最小個数
MIN_ARITY = {
    "B-1": (3, 0),
    "B-2": (1, 2),
    "B-3": (1, 2),
    "B-4": (2, 1),
    "B-5": (2, 1),
    "B-6": (1, 2),
    "B-7": (2, 1),
    "units": (1, 0),
    "theta": (0, 2),
    "theta-stability": (0, 2),
    "commutativity": (2, 0),
    "law-product": (2, 0),
    "law-pushforward": (1, 2),
    "law-pullback": (1, 1),
    "verdier-rr": (1, 1),
    "sga6-rr": (1, 1),
    "module-property": (2, 0),
    "module-property-class": (1, 0),
}


@dataclass(frozen=True)
class CheckSpec:
    """One entry of a scenario script; indices point into the scenario lists."""

    code: str
    elements: tuple[int, ...] = ()
    morphisms: tuple[int, ...] = ()
    spaces: tuple[int, ...] = ()
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"check": self.code}
        if self.elements:
            out["elements"] = list(self.elements)
        if self.morphisms:
            out["morphisms"] = list(self.morphisms)
        if self.spaces:
            out["spaces"] = list(self.spaces)
        out.update(self.params)
        return out


@dataclass
class Scenario:
    seed: int
    spaces: list[VarietyModel] = field(default_factory=list)
    morphisms: list[MorphismModel] = field(default_factory=list)
    elements: list[BivariantElement] = field(default_factory=list)
    script: list[CheckSpec] = field(default_factory=list)

    def describe(self) -> dict[str, Any]:
        """A deterministic summary of the scenario contents."""
        return {
            "seed": self.seed,
            "spaces": [x.key for x in self.spaces],
            "morphisms": [m.render() for m in self.morphisms],
            "elements": [e.render() for e in self.elements],
            "script": [c.to_dict() for c in self.script],
        }


# ---------------------------------------------------------------------------
# loading


def load_scenario(path: Path) -> Scenario:
    """Read and validate a scenario file."""
    if not path.exists():
        raise FileNotFoundError(f"シナリオファイルが見つかりません: {path}")
    return parse_scenario(path.read_text(encoding="utf-8"))


def parse_scenario(text: str, *, seed: int = 0) -> Scenario:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"JSON の解析に失敗しました: {e.msg}", path="$", line=e.lineno, column=e.colno
        ) from e
    return build_scenario(document, seed=seed)


def _require(mapping: Mapping[str, Any], key: str, path: str, kind: type | tuple[type, ...]) -> Any:
    if key not in mapping:
        raise SchemaError(f"必須フィールドがありません: {key}", path=path)
    value = mapping[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"型が不正です: {key}", path=f"{path}.{key}")
    return value


def _index(value: Any, size: int, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < size:
        raise SchemaError(f"範囲外の参照です: {value!r}", path=path)
    return value


def _indices(entry: Mapping[str, Any], key: str, size: int, path: str) -> tuple[int, ...]:
    values = entry.get(key, [])
    if not isinstance(values, list):
        raise SchemaError(f"{key} は配列でなければなりません", path=f"{path}.{key}")
    return tuple(_index(v, size, f"{path}.{key}[{i}]") for i, v in enumerate(values))


def _list(document: Mapping[str, Any], key: str) -> list[Any]:
    values = document.get(key, [])
    if not isinstance(values, list):
        raise SchemaError(f"{key} は配列でなければなりません", path=f"$.{key}")
    return values


def build_scenario(document: Any, *, seed: int = 0) -> Scenario:
    if not isinstance(document, dict):
        raise SchemaError("最上位はオブジェクトでなければなりません", path="$")
    version = _require(document, "version", "$", int)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"未対応のバージョンです: {version}", path="$.version")
    seed = document.get("seed", seed)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaError("seed は整数です", path="$.seed")
    scenario = Scenario(seed=seed)
    exprs = []
    for i, text in enumerate(_list(document, "spaces")):
        path = f"$.spaces[{i}]"
        if not isinstance(text, str):
            raise SchemaError("空間は式の文字列で書きます", path=path)
        try:
            expr = parse_expr(text)
            scenario.spaces.append(evaluate(expr))
        except MotbivError as e:
            raise SchemaError(str(e), path=path) from e
        exprs.append(expr)
    for i, entry in enumerate(_list(document, "morphisms")):
        path = f"$.morphisms[{i}]"
        try:
            scenario.morphisms.append(_build_morphism(entry, scenario, exprs, path))
        except SchemaError:
            raise
        except MotbivError as e:
            raise SchemaError(str(e), path=path) from e
    for i, entry in enumerate(_list(document, "elements")):
        path = f"$.elements[{i}]"
        try:
            scenario.elements.append(_build_element(entry, scenario, path))
        except SchemaError:
            raise
        except MotbivError as e:
            raise SchemaError(str(e), path=path) from e
    for i, entry in enumerate(_list(document, "checks")):
        scenario.script.append(_build_check(entry, scenario, f"$.checks[{i}]"))
    logger.info(
        "シナリオ読み込み: 空間 %d, 射 %d, 元 %d, 検査 %d",
        len(scenario.spaces),
        len(scenario.morphisms),
        len(scenario.elements),
        len(scenario.script),
    )
    return scenario


def _space(entry: Mapping[str, Any], key: str, scenario: Scenario, path: str) -> int:
    return _index(_require(entry, key, path, int), len(scenario.spaces), f"{path}.{key}")


def _build_morphism(
    entry: Any, scenario: Scenario, exprs: list[Any], path: str
) -> MorphismModel:
    if not isinstance(entry, dict):
        raise SchemaError("射はオブジェクトで書きます", path=path)
    kind = _require(entry, "kind", path, str)
    params = entry.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError("params はオブジェクトでなければなりません", path=f"{path}.params")

    def param(name: str) -> int:
        return _require(params, name, f"{path}.params", int)

    match kind:
        case "identity":
            morphism = identity(scenario.spaces[_space(entry, "src", scenario, path)])
        case "to_point":
            morphism = to_point(scenario.spaces[_space(entry, "src", scenario, path)])
        case "projection":
            src = scenario.spaces[_space(entry, "src", scenario, path)]
            positions = params.get("positions")
            if not isinstance(positions, list) or not all(isinstance(p, int) for p in positions):
                raise SchemaError("positions は整数の配列です", path=f"{path}.params.positions")
            morphism = projection(src, positions)
        case "bundle_projection":
            src = _space(entry, "src", scenario, path)
            if not isinstance(exprs[src], ProjBundleExpr):
                raise SchemaError("bundle_projection の始域は projbundle 式です", path=f"{path}.src")
            base, bundle = evaluate_bundle(exprs[src])
            morphism = bundle_projection(bundle_structure(base, bundle))
        case "linear_embedding":
            morphism = linear_embedding(param("k"), param("n"))
        case "point_inclusion":
            morphism = point_inclusion(scenario.spaces[_space(entry, "dst", scenario, path)])
        case "center_embedding":
            morphism = center_embedding(param("n"), param("m"))
        case "exceptional_inclusion":
            morphism = exceptional_inclusion(param("n"), param("m"))
        case "exceptional_projection":
            morphism = exceptional_projection(param("n"), param("m"))
        case "blow_down":
            morphism = blow_down(param("n"), param("m"))
        case "compose":
            parts = _indices(entry, "parts", len(scenario.morphisms), path)
            if not parts:
                raise SchemaError("compose には parts が必要です", path=f"{path}.parts")
            morphism = scenario.morphisms[parts[0]]
            for p in parts[1:]:
                morphism = compose(scenario.morphisms[p], morphism)
        case _:
            raise SchemaError(f"未知の射の種類です: {kind}", path=f"{path}.kind")

    for key, actual in (("src", morphism.source), ("dst", morphism.target)):
        if key in entry:
            declared = scenario.spaces[_space(entry, key, scenario, path)]
            if declared.key != actual.key:
                raise SchemaError(f"{key} が {actual.key} と一致しません", path=f"{path}.{key}")
    return morphism


def _build_element(entry: Any, scenario: Scenario, path: str) -> BivariantElement:
    if not isinstance(entry, dict):
        raise SchemaError("元はオブジェクトで書きます", path=path)
    if "unit" in entry:
        return unit(scenario.spaces[_space(entry, "unit", scenario, path)])
    if "theta" in entry:
        index = _index(entry["theta"], len(scenario.morphisms), f"{path}.theta")
        return orientation_theta(scenario.morphisms[index])
    reference_index = _index(
        _require(entry, "reference", path, int), len(scenario.morphisms), f"{path}.reference"
    )
    reference = scenario.morphisms[reference_index]
    terms = _require(entry, "terms", path, list)
    pairs = []
    for j, term in enumerate(terms):
        term_path = f"{path}.terms[{j}]"
        if not isinstance(term, dict):
            raise SchemaError("項はオブジェクトで書きます", path=term_path)
        h = scenario.morphisms[
            _index(_require(term, "map", term_path, int), len(scenario.morphisms), f"{term_path}.map")
        ]
        coeff = term.get("coeff", 1)
        if not isinstance(coeff, int) or isinstance(coeff, bool):
            raise SchemaError("係数は整数です", path=f"{term_path}.coeff")
        pairs.append((make_generator(h, reference), coeff))
    return BivariantElement.from_terms(reference, pairs)


def _build_check(entry: Any, scenario: Scenario, path: str) -> CheckSpec:
    if isinstance(entry, str):
        if entry not in (*SPACE_CHECKS, *ELEMENT_CHECKS):
            raise SchemaError(f"文字列で書けない検査です: {entry}", path=path)
        return CheckSpec(entry)
    if not isinstance(entry, dict):
        raise SchemaError("検査は文字列かオブジェクトで書きます", path=path)
    code = _require(entry, "check", path, str)
    if code not in KNOWN_CHECKS:
        raise SchemaError(f"未知の検査です: {code}", path=f"{path}.check")
    params = {
        k: v for k, v in entry.items() if k not in ("check", "elements", "morphisms", "spaces")
    }
    if code == "blowup":
        for name in ("n", "m"):
            _require(entry, name, path, int)
        if "base" in params:
            _space(entry, "base", scenario, path)
    if "series" in params and params["series"] not in SERIES_NAMES:
        raise SchemaError(f"未知の級数です: {params['series']}", path=f"{path}.series")
    transform = params.get("transform", "ty")
    if not isinstance(transform, str) or (
        transform not in ("lambda", "ty") and transform.removeprefix("gamma-") not in SERIES_NAMES
    ):
        raise SchemaError(f"未知の変換です: {transform}", path=f"{path}.transform")
    spec = CheckSpec(
        code,
        elements=_indices(entry, "elements", len(scenario.elements), path),
        morphisms=_indices(entry, "morphisms", len(scenario.morphisms), path),
        spaces=_indices(entry, "spaces", len(scenario.spaces), path),
        params=params,
    )
    need_elements, need_morphisms = MIN_ARITY.get(code, (0, 0))
    if len(spec.elements) < need_elements or len(spec.morphisms) < need_morphisms:
        msg = f"{code} には元 {need_elements} 個と射 {need_morphisms} 個が必要です"
        raise SchemaError(msg, path=path)
    return spec
