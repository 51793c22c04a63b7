"""Durable reuse library: a directory of canonical JSON documents.

One file per entry at ``<root>/<kind>/<id>.json`` plus an index file;
entries are content-addressed (sha256 of the canonical document) so
re-saving identical content is a no-op and tampering is detectable on
load. The layout is deliberately diff- and inspection-friendly; the
store interface is small enough to swap a database behind it.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .canonical import canonical_json, content_hash
from .environment import validate_environment_doc
from .errors import CorruptDocument, NotFound, StorageFailure, ValidationFailed
from .implementation import _descriptor_violations, descriptor_from_dict
from .model import protocol_from_dict, validate_abstract_protocol
from .report import ValidationReport, Violation

KINDS = ("abstract", "implemented", "process", "environment")

_STATUSES = ("running", "paused", "completed")


@dataclass(frozen=True)
class LibraryEntry:
    id: str
    kind: str
    document: dict
    tags: frozenset[str] = frozenset()

    @property
    def hash(self) -> str:
        return content_hash(self.document)


def validate_document(kind: str, document: dict) -> ValidationReport:
    """Validation applied before a document is persisted.

    Abstract protocols and environments are fully validated; implemented
    protocols and processes are checked structurally (their cross-kind
    references resolve only against a store or a live engine).
    """
    if kind == "abstract":
        return validate_abstract_protocol(protocol_from_dict(document))
    if kind == "environment":
        return validate_environment_doc(document)
    violations: list[Violation] = []
    if kind == "implemented":
        for key in ("id", "abstract_protocol_id", "resource_map", "activity_map"):
            if key not in document:
                violations.append(Violation("missing-field", key, f"document lacks {key!r}"))
        for aid, descriptor_doc in document.get("activity_map", {}).items():
            try:
                descriptor = descriptor_from_dict(descriptor_doc)
            except (KeyError, TypeError):
                violations.append(Violation("invalid-action", aid, "malformed action descriptor"))
                continue
            violations.extend(_descriptor_violations(aid, descriptor))
        return ValidationReport.build(violations)
    if kind == "process":
        for key in ("id", "implemented_protocol_id", "assignment", "marking", "status", "trace"):
            if key not in document:
                violations.append(Violation("missing-field", key, f"document lacks {key!r}"))
        if document.get("status") not in _STATUSES:
            violations.append(
                Violation("bad-status", str(document.get("status")), "unknown process status")
            )
        seqs = [entry.get("seq") for entry in document.get("trace", [])]
        if seqs != list(range(1, len(seqs) + 1)):
            violations.append(
                Violation("bad-trace", document.get("id", ""), "sequence numbers not contiguous from 1")
            )
        return ValidationReport.build(violations)
    raise ValueError(f"unknown artifact kind {kind!r}")


class FileStore:
    """Directory-backed document store with an index file."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.RLock()
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            for kind in KINDS:
                (self.root / kind).mkdir(exist_ok=True)
        except OSError as exc:
            raise StorageFailure(f"cannot initialize store at {self.root}: {exc}")

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    def _read_index(self) -> list[dict]:
        if not self.index_path.exists():
            return []
        return json.loads(self.index_path.read_text())["entries"]

    def _write_index(self, entries: list[dict]) -> None:
        entries = sorted(entries, key=lambda e: (e["kind"], e["id"]))
        _atomic_write(self.index_path, canonical_json({"entries": entries}))

    def _entry_path(self, kind: str, entry_id: str) -> Path:
        if kind not in KINDS:
            raise ValueError(f"unknown artifact kind {kind!r}")
        return self.root / kind / f"{entry_id}.json"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(".tmp")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageFailure(f"cannot write {path}: {exc}")


def save_artifact(store: FileStore, entry: LibraryEntry) -> str:
    """Persist an entry and return its content hash.

    The document must pass its kind's validation. Re-saving identical
    content returns the same hash without touching the file.
    """
    report = validate_document(entry.kind, entry.document)
    if not report.ok:
        raise ValidationFailed(f"{entry.kind} document {entry.id!r} invalid", report)
    digest = entry.hash
    with store._lock:
        path = store._entry_path(entry.kind, entry.id)
        payload = {
            "kind": entry.kind,
            "id": entry.id,
            "tags": sorted(entry.tags),
            "hash": digest,
            "document": entry.document,
        }
        if path.exists():
            existing = json.loads(path.read_text())
            if existing.get("hash") == digest and set(existing.get("tags", [])) == set(entry.tags):
                return digest
        _atomic_write(path, canonical_json(payload))
        index = [
            e for e in store._read_index() if not (e["kind"] == entry.kind and e["id"] == entry.id)
        ]
        index.append(
            {"kind": entry.kind, "id": entry.id, "hash": digest, "tags": sorted(entry.tags)}
        )
        store._write_index(index)
    return digest


def load_artifact(store: FileStore, kind: str, entry_id: str) -> LibraryEntry:
    """Load an entry, refusing documents whose hash check fails."""
    with store._lock:
        path = store._entry_path(kind, entry_id)
        if not path.exists():
            raise NotFound(f"no {kind} artifact {entry_id!r}", [entry_id])
        try:
            payload = json.loads(path.read_text())
        except (OSError, ValueError) as exc:
            raise CorruptDocument(f"cannot read {path}: {exc}", [entry_id])
    document = payload.get("document")
    if document is None or content_hash(document) != payload.get("hash"):
        raise CorruptDocument(f"{kind} artifact {entry_id!r} failed its hash check", [entry_id])
    return LibraryEntry(
        id=payload["id"],
        kind=payload["kind"],
        document=document,
        tags=frozenset(payload.get("tags", [])),
    )


def search_library(
    store: FileStore, kind: str | None = None, tags: list[str] | tuple[str, ...] = ()
) -> list[tuple[str, frozenset[str], str]]:
    """Entries whose tag set includes all query tags, sorted by id."""
    wanted = set(tags)
    results = []
    with store._lock:
        for entry in store._read_index():
            if kind is not None and entry["kind"] != kind:
                continue
            entry_tags = set(entry.get("tags", []))
            if not wanted <= entry_tags:
                continue
            results.append((entry["id"], frozenset(entry_tags), entry["hash"]))
    return sorted(results, key=lambda item: item[0])
