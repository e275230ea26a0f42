"""Check reports shared by the bivariant, motivic and transformation checks."""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

from motbiv.errors import ReferenceMismatch, UnsupportedFiberProduct, UnsupportedMorphism

logger = logging.getLogger(__name__)


class Status(StrEnum):
    PASS = "pass"
    FAIL = "fail"
    UNSUPPORTED = "unsupported"


@dataclass(frozen=True)
class CheckReport:
    """Both sides of one identity and whether they agree.

    ``informational`` reports (commutativity) are recorded but never count
    as failures.
    """

    check: str
    inputs: Mapping[str, Any]
    lhs: str
    rhs: str
    status: Status
    detail: str = ""
    informational: bool = False

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "inputs": dict(self.inputs),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "pass": None if self.status is Status.UNSUPPORTED else self.passed,
            "status": self.status.value,
            "detail": self.detail,
        }

    def render(self) -> str:
        line = f"[{self.status.value}] {self.check}"
        if self.status is Status.FAIL:
            line += f"\n  lhs: {self.lhs}\n  rhs: {self.rhs}"
        if self.detail:
            line += f"\n  ({self.detail})"
        return line


def _text(value: Any) -> str:
    render = getattr(value, "render", None)
    return render() if callable(render) else str(value)


@dataclass(frozen=True)
class Sides:
    """Several values compared at once, rendered side by side."""

    values: tuple[Any, ...]

    def render(self) -> str:
        return " | ".join(_text(v) for v in self.values)


def compare(
    check: str,
    inputs: Mapping[str, Any],
    lhs: Any,
    rhs: Any,
    *,
    informational: bool = False,
) -> CheckReport:
    status = Status.PASS if lhs == rhs else Status.FAIL
    if status is Status.FAIL and not informational:
        logger.warning("検証失敗: %s", check)
    return CheckReport(
        check, inputs, _text(lhs), _text(rhs), status, informational=informational
    )


def unsupported(check: str, inputs: Mapping[str, Any], reason: str) -> CheckReport:
    logger.debug("対象外: %s (%s)", check, reason)
    return CheckReport(check, inputs, "", "", Status.UNSUPPORTED, detail=reason)


def guarded(
    check: str,
    inputs: Mapping[str, Any],
    body: Callable[[], CheckReport],
) -> CheckReport:
    """Run a check; squares outside the catalogue become "unsupported"."""
    try:
        return body()
    except (UnsupportedFiberProduct, UnsupportedMorphism, ReferenceMismatch) as e:
        return unsupported(check, inputs, str(e))


@dataclass
class ReportTally:
    """Running counts over a list of reports."""

    executed: int = 0
    passed: int = 0
    failed: int = 0
    unsupported: int = 0
    failures: list[CheckReport] = field(default_factory=list)
    observations: list[CheckReport] = field(default_factory=list)

    def add(self, report: CheckReport) -> None:
        if report.status is Status.UNSUPPORTED:
            self.unsupported += 1
            return
        if report.informational:
            if not report.passed:
                self.observations.append(report)
            return
        self.executed += 1
        if report.passed:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(report)

    def extend(self, reports: list[CheckReport]) -> None:
        for report in reports:
            self.add(report)
