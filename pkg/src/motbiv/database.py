"""Database module for recorded check runs."""

from __future__ import annotations

import json
import sqlite3
from pathlib import Path
from typing import Any

_CREATE_TABLE = """\
CREATE TABLE IF NOT EXISTS check_runs (
    id INTEGER PRIMARY KEY,
    kind TEXT NOT NULL,
    seed INTEGER,
    cases INTEGER,
    checksum TEXT NOT NULL,
    executed INTEGER NOT NULL,
    passed INTEGER NOT NULL,
    failed INTEGER NOT NULL,
    unsupported INTEGER NOT NULL,
    summary_json TEXT NOT NULL,
    recorded_at DATETIME NOT NULL,
    created_at DATETIME DEFAULT CURRENT_TIMESTAMP
)
"""

_CREATE_INDEXES = [
    "CREATE INDEX IF NOT EXISTS idx_checksum ON check_runs (checksum)",
    "CREATE INDEX IF NOT EXISTS idx_kind ON check_runs (kind)",
]


def _connect(db_path: Path) -> sqlite3.Connection:
    conn = sqlite3.connect(db_path)
    conn.row_factory = sqlite3.Row
    return conn


def init_database(db_path: Path) -> None:
    """Create the check_runs table and indexes."""
    db_path.parent.mkdir(parents=True, exist_ok=True)
    conn = _connect(db_path)
    try:
        conn.execute(_CREATE_TABLE)
        for idx_sql in _CREATE_INDEXES:
            conn.execute(idx_sql)
        conn.commit()
    finally:
        conn.close()


def insert_run(db_path: Path, record: dict[str, Any]) -> None:
    """Insert one check run; ``summary`` is stored as JSON."""
    recorded_at = record["recorded_at"]
    if hasattr(recorded_at, "isoformat"):
        recorded_at = recorded_at.isoformat()

    conn = _connect(db_path)
    try:
        conn.execute(
            """\
            INSERT INTO check_runs (
                kind, seed, cases, checksum,
                executed, passed, failed, unsupported,
                summary_json, recorded_at
            ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                record["kind"],
                record.get("seed"),
                record.get("cases"),
                record["checksum"],
                record["executed"],
                record["passed"],
                record["failed"],
                record["unsupported"],
                json.dumps(record["summary"], sort_keys=True, ensure_ascii=False),
                recorded_at,
            ),
        )
        conn.commit()
    finally:
        conn.close()


def get_by_checksum(db_path: Path, checksum: str) -> dict[str, Any] | None:
    """Look up a run by checksum."""
    conn = _connect(db_path)
    try:
        cursor = conn.execute(
            "SELECT * FROM check_runs WHERE checksum = ?",
            (checksum,),
        )
        row = cursor.fetchone()
        return dict(row) if row else None
    finally:
        conn.close()


def get_summary(db_path: Path) -> dict[str, Any]:
    """Run counts per kind plus totals."""
    conn = _connect(db_path)
    try:
        cursor = conn.execute(
            """\
            SELECT kind, COUNT(*) AS runs, SUM(failed > 0) AS failing
            FROM check_runs GROUP BY kind ORDER BY kind
            """
        )
        kinds = {
            row["kind"]: {"runs": row["runs"], "failing": row["failing"] or 0}
            for row in cursor.fetchall()
        }
        return {
            "kinds": kinds,
            "total": sum(k["runs"] for k in kinds.values()),
            "failing": sum(k["failing"] for k in kinds.values()),
        }
    finally:
        conn.close()


def list_by_kind(db_path: Path, kind: str) -> list[dict[str, Any]]:
    """List all runs of one kind."""
    conn = _connect(db_path)
    try:
        cursor = conn.execute(
            "SELECT * FROM check_runs WHERE kind = ? ORDER BY recorded_at, id",
            (kind,),
        )
        return [dict(row) for row in cursor.fetchall()]
    finally:
        conn.close()


def export_all(db_path: Path) -> list[dict[str, Any]]:
    """Export all recorded runs."""
    conn = _connect(db_path)
    try:
        cursor = conn.execute("SELECT * FROM check_runs ORDER BY id")
        return [dict(row) for row in cursor.fetchall()]
    finally:
        conn.close()
