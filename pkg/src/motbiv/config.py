"""Configuration module for motbiv."""

from __future__ import annotations

import os
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

SERIES_ORDER_ENV = "MOTBIV_SERIES_ORDER"
BUDGET_CEILING = 3


@dataclass
class SeriesConfig:
    order: int = 0


@dataclass
class HarnessConfig:
    seed: int = 0
    cases: int = 100
    workers: int = 1
    max_dim: int = 3
    max_chain: int = 3
    max_rank: int = 3


@dataclass
class DatabaseConfig:
    path: str = "./motbiv.db"


@dataclass
class LoggingConfig:
    level: str = "WARNING"
    file: str = ""


@dataclass
class Config:
    series: SeriesConfig = field(default_factory=SeriesConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    database: DatabaseConfig = field(default_factory=DatabaseConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)


def _build_dataclass(cls: type, data: dict[str, Any]) -> Any:
    """Build a dataclass instance from a dict, ignoring unknown keys."""
    valid_fields = {f.name for f in cls.__dataclass_fields__.values()}
    filtered = {k: v for k, v in data.items() if k in valid_fields}
    return cls(**filtered)


def load_config(path: Path) -> Config:
    """Load configuration from a TOML file."""
    if not path.exists():
        raise FileNotFoundError(f"設定ファイルが見つかりません: {path}")

    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        msg = f"設定ファイルの解析に失敗しました: {path}: {e}"
        raise ValueError(msg) from e

    return Config(
        series=_build_dataclass(SeriesConfig, raw.get("series", {})),
        harness=_build_dataclass(HarnessConfig, raw.get("harness", {})),
        database=_build_dataclass(DatabaseConfig, raw.get("database", {})),
        logging=_build_dataclass(LoggingConfig, raw.get("logging", {})),
    )


def resolve_config(
    config: Config,
    *,
    seed: int | None = None,
    cases: int | None = None,
    workers: int | None = None,
) -> Config:
    """Apply CLI overrides and validate ranges."""
    harness = config.harness
    if seed is not None:
        harness.seed = seed
    if cases is not None:
        harness.cases = cases
    if workers is not None:
        harness.workers = workers

    if harness.seed < 0:
        raise ValueError(f"seed は 0 以上でなければなりません: {harness.seed}")
    if harness.cases < 0:
        raise ValueError(f"cases は 0 以上でなければなりません: {harness.cases}")
    if harness.workers < 1:
        raise ValueError(f"workers は 1 以上でなければなりません: {harness.workers}")
    for name in ("max_dim", "max_chain", "max_rank"):
        value = getattr(harness, name)
        if not 0 <= value <= BUDGET_CEILING:
            msg = f"[harness] {name} は 0 から {BUDGET_CEILING} の範囲で指定してください: {value}"
            raise ValueError(msg)
    if config.series.order < 0:
        raise ValueError(f"[series] order は 0 以上でなければなりません: {config.series.order}")

    return config


def resolve_series_order(config: Config, *, env_file: Path | None = None) -> int | None:
    """Resolve the series order; None means "as high as the varieties need".

    Priority: .env file > OS environment variable > config file.
    """
    from dotenv import dotenv_values

    raw: str | None = None
    if env_file is not None and env_file.exists():
        raw = dotenv_values(env_file).get(SERIES_ORDER_ENV) or None
    if raw is None:
        raw = os.environ.get(SERIES_ORDER_ENV) or None

    if raw is None:
        return config.series.order or None

    try:
        order = int(raw)
    except ValueError as e:
        msg = f"環境変数 {SERIES_ORDER_ENV} が整数ではありません: {raw}"
        raise ValueError(msg) from e
    if order < 0:
        raise ValueError(f"環境変数 {SERIES_ORDER_ENV} が負です: {order}")
    return order or None
