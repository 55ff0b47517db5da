"""Canonical JSON encoding shared by corpus files, the graph store, and HTTP bodies.

Canonical form: UTF-8, object keys sorted ascending, compact separators,
floats in Python's shortest round-trip repr. Equal values always encode to
equal bytes, which makes corpora diffable and service responses
byte-deterministic.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Iterable


def canonical_bytes(obj: Any) -> bytes:
    return json.dumps(
        obj,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    ).encode("utf-8")


def canonical_line(obj: Any) -> bytes:
    return canonical_bytes(obj) + b"\n"


def digest_lines(lines: Iterable[bytes]) -> str:
    """sha256 hex digest over concatenated canonical lines."""
    h = hashlib.sha256()
    for line in lines:
        h.update(line)
    return h.hexdigest()
