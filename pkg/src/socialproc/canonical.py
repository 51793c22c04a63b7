"""Canonical JSON serialization and content hashing.

Canonical form: keys sorted, no insignificant whitespace, ASCII-escaped.
Version hashes and the document store depend on this form being stable
byte for byte, so never change the dump parameters.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(doc: Any) -> str:
    """sha256 hex digest of the canonical serialization of ``doc``."""
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()
