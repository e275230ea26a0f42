"""Checksums of run summaries and scenario files, and deduplication."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any

from motbiv.database import get_by_checksum

logger = logging.getLogger(__name__)

_BUF_SIZE = 65536  # 64KB


def canonical_bytes(summary: dict[str, Any]) -> bytes:
    """Key-sorted compact JSON, the form summaries are hashed in."""
    text = json.dumps(summary, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return text.encode("utf-8")


def compute_checksum(data: bytes | Path) -> str:
    """Compute the SHA-256 checksum of bytes or of a file.

    Args:
        data: Raw bytes, or the path of a file read in chunks.

    Returns:
        Hex-encoded SHA-256 digest.

    Raises:
        FileNotFoundError: If a path is given and the file does not exist.
    """
    sha256 = hashlib.sha256()
    if isinstance(data, bytes):
        sha256.update(data)
        return sha256.hexdigest()

    if not data.exists():
        msg = f"ファイルが見つかりません: {data}"
        raise FileNotFoundError(msg)

    with data.open("rb") as f:
        while True:
            chunk = f.read(_BUF_SIZE)
            if not chunk:
                break
            sha256.update(chunk)
    return sha256.hexdigest()


def is_recorded(db_path: Path, checksum: str) -> bool:
    """True if a run with this checksum is already in the database."""
    if not db_path.exists():
        return False
    found = get_by_checksum(db_path, checksum) is not None
    if found:
        logger.debug("記録済みのためスキップ: %s", checksum[:12])
    return found
