"""Tests for database module."""

import json
import sqlite3
from datetime import datetime, timezone
from pathlib import Path

import pytest


@pytest.fixture()
def db_path(tmp_path: Path) -> Path:
    return tmp_path / "test.db"


@pytest.fixture()
def sample_record() -> dict:
    return {
        "kind": "axioms",
        "seed": 0,
        "cases": 10,
        "checksum": "abc123def456",
        "executed": 120,
        "passed": 120,
        "failed": 0,
        "unsupported": 4,
        "summary": {"scenarios": 10, "failed": 0},
        "recorded_at": datetime(2026, 1, 1, 12, 0, 0, tzinfo=timezone.utc),
    }


class TestInitDatabase:
    """Tests for database initialization."""

    def test_creates_table_and_indexes(self, db_path: Path) -> None:
        from motbiv.database import init_database

        init_database(db_path)

        conn = sqlite3.connect(db_path)
        cursor = conn.execute("SELECT name FROM sqlite_master WHERE type='table'")
        tables = {row[0] for row in cursor.fetchall()}
        assert "check_runs" in tables

        cursor = conn.execute("SELECT name FROM sqlite_master WHERE type='index'")
        indexes = {row[0] for row in cursor.fetchall()}
        assert "idx_checksum" in indexes
        assert "idx_kind" in indexes
        conn.close()

    def test_idempotent_init(self, db_path: Path) -> None:
        from motbiv.database import init_database

        init_database(db_path)
        init_database(db_path)

        assert db_path.exists()


class TestInsertRun:
    """Tests for insert_run and lookups."""

    def test_insert_and_get_by_checksum(self, db_path: Path, sample_record: dict) -> None:
        from motbiv.database import get_by_checksum, init_database, insert_run

        init_database(db_path)
        insert_run(db_path, sample_record)

        row = get_by_checksum(db_path, "abc123def456")
        assert row is not None
        assert row["kind"] == "axioms"
        assert row["executed"] == 120
        assert row["unsupported"] == 4
        assert json.loads(row["summary_json"]) == {"scenarios": 10, "failed": 0}
        assert row["recorded_at"].startswith("2026-01-01T12:00:00")

    def test_missing_checksum(self, db_path: Path) -> None:
        from motbiv.database import get_by_checksum, init_database

        init_database(db_path)

        assert get_by_checksum(db_path, "nothing") is None

    def test_optional_seed_and_cases(self, db_path: Path, sample_record: dict) -> None:
        from motbiv.database import export_all, init_database, insert_run

        init_database(db_path)
        record = {k: v for k, v in sample_record.items() if k not in ("seed", "cases")}
        insert_run(db_path, record)

        (row,) = export_all(db_path)
        assert row["seed"] is None
        assert row["cases"] is None


class TestQueries:
    """Tests for get_summary, list_by_kind and export_all."""

    def test_summary_counts_failing_runs(self, db_path: Path, sample_record: dict) -> None:
        from motbiv.database import get_summary, init_database, insert_run

        init_database(db_path)
        insert_run(db_path, sample_record)
        insert_run(db_path, {**sample_record, "checksum": "x", "failed": 2})
        insert_run(db_path, {**sample_record, "checksum": "y", "kind": "blowup"})

        summary = get_summary(db_path)

        assert summary["kinds"]["axioms"] == {"runs": 2, "failing": 1}
        assert summary["kinds"]["blowup"] == {"runs": 1, "failing": 0}
        assert summary["total"] == 3
        assert summary["failing"] == 1

    def test_empty_summary(self, db_path: Path) -> None:
        from motbiv.database import get_summary, init_database

        init_database(db_path)

        assert get_summary(db_path) == {"kinds": {}, "total": 0, "failing": 0}

    def test_list_by_kind(self, db_path: Path, sample_record: dict) -> None:
        from motbiv.database import init_database, insert_run, list_by_kind

        init_database(db_path)
        insert_run(db_path, sample_record)
        insert_run(db_path, {**sample_record, "checksum": "y", "kind": "rr"})

        rows = list_by_kind(db_path, "rr")

        assert [r["checksum"] for r in rows] == ["y"]

    def test_export_all_in_insertion_order(self, db_path: Path, sample_record: dict) -> None:
        from motbiv.database import export_all, init_database, insert_run

        init_database(db_path)
        for checksum in ("a", "b", "c"):
            insert_run(db_path, {**sample_record, "checksum": checksum})

        assert [r["checksum"] for r in export_all(db_path)] == ["a", "b", "c"]
