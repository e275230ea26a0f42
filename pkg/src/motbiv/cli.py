"""CLI entry point for motbiv."""

import csv
import io
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, NoReturn

import typer

from motbiv.checksum import canonical_bytes, compute_checksum, is_recorded
from motbiv.config import Config, load_config, resolve_config, resolve_series_order
from motbiv.database import (
    export_all,
    get_summary,
    init_database,
    insert_run,
    list_by_kind,
)
from motbiv.errors import MotbivError
from motbiv.exactalg import rational
from motbiv.expr import parse_variety
from motbiv.genus import CLASS_NAMES, chi_y, named_class
from motbiv.harness import SUITE_KINDS, Budget, RunResult, SuiteSummary, run_check, run_suite
from motbiv.logging_config import setup_logging
from motbiv.scenario import load_scenario
from motbiv.varmodel import tangent_bundle

app = typer.Typer()

logger = logging.getLogger("motbiv")

_DEFAULT_CONFIG = Path("motbiv.toml")
_ENV_FILE = Path(".env")

EXIT_FAILED = 1
EXIT_USAGE = 2

_EXPORT_COLUMNS = (
    "id",
    "kind",
    "seed",
    "cases",
    "checksum",
    "executed",
    "passed",
    "failed",
    "unsupported",
    "recorded_at",
)


def _abort(e: Exception, code: int = EXIT_USAGE) -> NoReturn:
    typer.echo(f"Error: {e}", err=True)
    raise typer.Exit(code=code) from e


def _prepare(config: str | None, verbose: bool) -> Config:
    """Load the config (``motbiv.toml`` if present) and set up logging."""
    try:
        if config is not None:
            cfg = load_config(Path(config))
        elif _DEFAULT_CONFIG.exists():
            cfg = load_config(_DEFAULT_CONFIG)
        else:
            cfg = Config()
    except (FileNotFoundError, ValueError) as e:
        _abort(e)

    log_level = "DEBUG" if verbose else cfg.logging.level
    setup_logging(level=log_level, log_file=cfg.logging.file)
    return cfg


def _emit(payload: dict[str, Any]) -> None:
    typer.echo(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False))


def _summary_line(label: str, s: SuiteSummary) -> str:
    return (
        f"{label}: executed {s.executed}, passed {s.passed}, "
        f"failed {s.failed}, unsupported {s.unsupported}"
    )


def _echo_failures(s: SuiteSummary) -> None:
    for report in s.failures:
        typer.echo(report.render())


def _record(cfg: Config, kind: str, checksum: str, summary: dict[str, Any], **extra: Any) -> None:
    if not cfg.database.path:
        logger.warning("[database] path が空のため記録しません")
        return
    db_path = Path(cfg.database.path)
    init_database(db_path)
    if is_recorded(db_path, checksum):
        logger.info("同じ結果が記録済みです: %s", checksum[:12])
        return
    insert_run(
        db_path,
        {
            "kind": kind,
            "checksum": checksum,
            "executed": summary["executed"],
            "passed": summary["passed"],
            "failed": summary["failed"],
            "unsupported": summary["unsupported"],
            "summary": summary,
            "recorded_at": datetime.now(),
            **extra,
        },
    )
    logger.info("記録しました: %s (%s)", kind, checksum[:12])


@app.command("class")
def class_(
    expr: str = typer.Argument(..., help="Variety expression, e.g. P(2) or blowup(P(3),P(1))"),
    name: str = typer.Argument(..., help=f"Class name ({'/'.join(CLASS_NAMES)})"),
    y: str | None = typer.Option(None, "--y", help="Substitute a rational value for y"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable output"),
    config: str | None = typer.Option(None, "--config", "-c", help="Config file path"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose logging"),
) -> None:
    """Print a characteristic class of the tangent bundle."""
    cfg = _prepare(config, verbose)
    try:
        order = resolve_series_order(cfg, env_file=_ENV_FILE)
        x = parse_variety(expr)
        value = named_class(name, tangent_bundle(x), order=order)
        if y is not None:
            value = value.evaluate_y(rational(y))
    except (MotbivError, ValueError, ZeroDivisionError) as e:
        _abort(e)

    if as_json:
        _emit({"expr": x.key, "class": name, "y": y, "value": value.render()})
    else:
        typer.echo(value.render())


@app.command()
def genus(
    expr: str = typer.Argument(..., help="Variety expression"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable output"),
    config: str | None = typer.Option(None, "--config", "-c", help="Config file path"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose logging"),
) -> None:
    """Print the χ_y genus."""
    _prepare(config, verbose)
    try:
        x = parse_variety(expr)
        value = chi_y(x)
    except MotbivError as e:
        _abort(e)

    if as_json:
        _emit({"expr": x.key, "chi_y": value.render()})
    else:
        typer.echo(value.render())


@app.command()
def check(
    kind: str = typer.Argument(..., help=f"Suite ({'/'.join(SUITE_KINDS)})"),
    seed: int | None = typer.Option(None, "--seed", help="First seed (config fallback)"),
    cases: int | None = typer.Option(None, "--cases", help="Number of scenarios (config fallback)"),
    n: int = typer.Option(2, "--n", help="Blow-up ambient dimension"),
    m: int = typer.Option(0, "--m", help="Blow-up center dimension"),
    workers: int | None = typer.Option(None, "--workers", "-w", help="Worker processes"),
    inject_fault: bool = typer.Option(
        False, "--inject-fault", help="Corrupt the blow-down push table (self-test)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable output"),
    record: bool = typer.Option(False, "--record", help="Record the run in the database"),
    config: str | None = typer.Option(None, "--config", "-c", help="Config file path"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose logging"),
) -> None:
    """Run a check suite; exit 1 if any check fails."""
    cfg = _prepare(config, verbose)
    try:
        cfg = resolve_config(cfg, seed=seed, cases=cases, workers=workers)
        h = cfg.harness
        budget = Budget(h.max_dim, h.max_chain, h.max_rank)
        result = run_check(
            kind,
            seed=h.seed,
            cases=h.cases,
            n=n,
            m=m,
            budget=budget,
            workers=h.workers,
            corrupt=inject_fault,
        )
    except (MotbivError, ValueError) as e:
        _abort(e)

    payload = result.to_dict()
    if as_json:
        _emit(payload)
    else:
        _echo_result(kind, result)

    if record:
        checksum = compute_checksum(canonical_bytes({"kind": kind, **payload}))
        _record(cfg, kind, checksum, payload, seed=cfg.harness.seed, cases=cfg.harness.cases)

    if not result.ok:
        raise typer.Exit(code=EXIT_FAILED)


def _echo_result(kind: str, result: RunResult) -> None:
    if result.summaries:
        totals = SuiteSummary(
            seed=result.summaries[0].seed,
            executed=sum(s.executed for s in result.summaries),
            passed=sum(s.passed for s in result.summaries),
            failed=sum(s.failed for s in result.summaries),
            unsupported=sum(s.unsupported for s in result.summaries),
        )
        typer.echo(_summary_line(f"{kind} ({len(result.summaries)} scenarios)", totals))
    for s in result.extra:
        typer.echo(_summary_line(f"{kind} (blow-up suite)", s))
    warning = result.coverage_warning()
    if warning:
        typer.echo(f"warning: {warning}")
    for s in (*result.summaries, *result.extra):
        _echo_failures(s)
    typer.echo("PASS" if result.ok else "FAIL")


@app.command()
def scenario(
    path: Path = typer.Argument(..., help="Scenario JSON file"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable output"),
    record: bool = typer.Option(False, "--record", help="Record the run in the database"),
    config: str | None = typer.Option(None, "--config", "-c", help="Config file path"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose logging"),
) -> None:
    """Run the checks of a scenario file."""
    cfg = _prepare(config, verbose)
    try:
        loaded = load_scenario(path)
    except (FileNotFoundError, MotbivError) as e:
        _abort(e)

    summary = run_suite(loaded)
    payload = summary.to_dict()
    if as_json:
        _emit(payload)
    else:
        typer.echo(_summary_line(path.name, summary))
        _echo_failures(summary)
        typer.echo("PASS" if summary.ok else "FAIL")

    if record:
        _record(cfg, "scenario", compute_checksum(path), payload, seed=summary.seed)

    if not summary.ok:
        raise typer.Exit(code=EXIT_FAILED)


@app.command()
def status(
    kind: str | None = typer.Option(None, "--kind", help="List the runs of one kind"),
    config: str | None = typer.Option(None, "--config", "-c", help="Config file path"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose logging"),
) -> None:
    """Show a summary of recorded check runs."""
    cfg = _prepare(config, verbose)
    db_path = Path(cfg.database.path) if cfg.database.path else None
    if db_path is None or not db_path.exists():
        typer.echo("No recorded runs")
        return
    if kind is not None:
        _echo_runs(kind, list_by_kind(db_path, kind))
        return
    summary = get_summary(db_path)
    for name, counts in summary["kinds"].items():
        typer.echo(f"{name}: {counts['runs']} runs, {counts['failing']} failing")
    typer.echo(f"total: {summary['total']} runs, {summary['failing']} failing")


def _echo_runs(kind: str, rows: list[dict[str, Any]]) -> None:
    if not rows:
        typer.echo(f"No recorded runs for {kind}")
        return
    for row in rows:
        typer.echo(
            f"#{row['id']} seed={row['seed']} cases={row['cases']}: "
            f"executed {row['executed']}, failed {row['failed']}, "
            f"unsupported {row['unsupported']} ({row['checksum'][:12]})"
        )


@app.command()
def export(
    format: str = typer.Option("json", "--format", help="Export format (json/csv)"),
    config: str | None = typer.Option(None, "--config", "-c", help="Config file path"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose logging"),
) -> None:
    """Export recorded check runs."""
    if format not in ("json", "csv"):
        _abort(ValueError(f"未対応の出力形式です: {format}"))
    cfg = _prepare(config, verbose)
    db_path = Path(cfg.database.path) if cfg.database.path else None
    rows = export_all(db_path) if db_path is not None and db_path.exists() else []

    if format == "json":
        for row in rows:
            row["summary"] = json.loads(row.pop("summary_json"))
        typer.echo(json.dumps(rows, sort_keys=True, indent=2, ensure_ascii=False))
        return

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_EXPORT_COLUMNS, extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    typer.echo(buffer.getvalue(), nl=False)


if __name__ == "__main__":
    app()
