"""Tests for logging configuration module."""

import logging
from pathlib import Path

from motbiv.logging_config import setup_logging


class TestSetupLogging:
    """Tests for setup_logging function."""

    def test_sets_log_level(self, tmp_path: Path) -> None:
        setup_logging(level="WARNING", log_file=str(tmp_path / "test.log"))

        root = logging.getLogger()
        assert root.level == logging.WARNING

    def test_creates_log_file(self, tmp_path: Path) -> None:
        log_file = tmp_path / "logs" / "motbiv.log"

        setup_logging(level="INFO", log_file=str(log_file))

        # ログを書き込んでファイル生成を確認
        logging.getLogger("test_creates_log_file").info("test message")

        assert log_file.exists()

    def test_console_only_without_file(self) -> None:
        root = logging.getLogger()
        before = list(root.handlers)

        setup_logging(level="INFO", log_file="")

        added = [h for h in root.handlers if h not in before]
        assert [type(h) for h in added] == [logging.StreamHandler]

    def test_has_file_handler(self, tmp_path: Path) -> None:
        root = logging.getLogger()
        before = list(root.handlers)

        setup_logging(level="INFO", log_file=str(tmp_path / "test.log"))

        added = [h for h in root.handlers if h not in before]
        assert [type(h) for h in added] == [logging.StreamHandler, logging.FileHandler]

    def test_log_format_contains_timestamp_and_level(self, tmp_path: Path) -> None:
        log_file = tmp_path / "test.log"

        setup_logging(level="DEBUG", log_file=str(log_file))
        logging.getLogger("motbiv.sample").debug("フォーマット確認")
        for handler in logging.getLogger().handlers:
            handler.flush()

        content = log_file.read_text(encoding="utf-8")
        assert "[DEBUG] motbiv.sample: フォーマット確認" in content

    def test_invalid_level_falls_back_to_info(self) -> None:
        setup_logging(level="LOUD")

        assert logging.getLogger().level == logging.INFO

    def test_third_party_loggers_quieted(self) -> None:
        setup_logging(level="DEBUG")

        assert logging.getLogger("sympy").level == logging.WARNING
        assert logging.getLogger("parsy").level == logging.WARNING
