from __future__ import annotations

import json

import pytest

from socialproc import fixtures
from socialproc.engine import fire, instantiate
from socialproc.errors import CorruptDocument, NotFound, ValidationFailed
from socialproc.interchange import process_to_dict
from socialproc.library import (
    FileStore,
    LibraryEntry,
    load_artifact,
    save_artifact,
    search_library,
)
from socialproc.model import Edge


@pytest.fixture
def store(tmp_path):
    return FileStore(tmp_path / "library")


def brainstorming_entry():
    return LibraryEntry(
        id="brainstorming",
        kind="abstract",
        document=fixtures.brainstorming_protocol().to_dict(),
        tags=frozenset({"brainstorming", "collaboration-pattern"}),
    )


def test_save_is_content_addressed(store):
    entry = brainstorming_entry()
    first = save_artifact(store, entry)
    second = save_artifact(store, entry)
    assert first == second == entry.hash


def test_invalid_protocol_rejected(store):
    protocol = fixtures.brainstorming_protocol()
    protocol.interaction.edges.append(Edge("problem-pending", "waiting-for-ideas"))
    with pytest.raises(ValidationFailed):
        save_artifact(
            store, LibraryEntry(id="broken", kind="abstract", document=protocol.to_dict())
        )


def test_survives_restart(store, tmp_path):
    save_artifact(store, brainstorming_entry())
    reopened = FileStore(tmp_path / "library")
    entry = load_artifact(reopened, "abstract", "brainstorming")
    assert entry.document == fixtures.brainstorming_protocol().to_dict()


def test_unknown_id_not_found(store):
    with pytest.raises(NotFound):
        load_artifact(store, "abstract", "ghost")


def test_tampered_file_detected(store):
    save_artifact(store, brainstorming_entry())
    path = store._entry_path("abstract", "brainstorming")
    payload = json.loads(path.read_text())
    payload["document"]["tags"] = ["subverted"]
    path.write_text(json.dumps(payload))
    with pytest.raises(CorruptDocument):
        load_artifact(store, "abstract", "brainstorming")


def test_round_trip_every_kind(store, environment, implemented_protocol):
    process = instantiate(
        implemented_protocol, fixtures.BRAINSTORMING_ASSIGNMENT, environment, process_id="p1"
    )
    fire(process, "john", "present-problem")
    docs = {
        "abstract": implemented_protocol.abstract.to_dict(),
        "implemented": implemented_protocol.to_dict(),
        "process": process_to_dict(process),
        "environment": environment.to_dict(),
    }
    for kind, document in docs.items():
        save_artifact(store, LibraryEntry(id=f"x-{kind}", kind=kind, document=document))
    for kind, document in docs.items():
        loaded = load_artifact(store, kind, f"x-{kind}")
        assert loaded.document == document


def test_hash_stable_across_two_cycles(store):
    entry = brainstorming_entry()
    h1 = save_artifact(store, entry)
    loaded1 = load_artifact(store, "abstract", "brainstorming")
    h2 = save_artifact(
        store, LibraryEntry(id="brainstorming", kind="abstract", document=loaded1.document,
                            tags=loaded1.tags)
    )
    loaded2 = load_artifact(store, "abstract", "brainstorming")
    assert h1 == h2 == loaded2.hash
    assert loaded1.document == loaded2.document


def test_search_by_tags(store):
    save_artifact(store, brainstorming_entry())
    save_artifact(
        store,
        LibraryEntry(
            id="solo-review",
            kind="abstract",
            document=fixtures.solo_review_protocol().to_dict(),
            tags=frozenset({"review"}),
        ),
    )
    hits = search_library(store, "abstract", ["brainstorming"])
    assert [h[0] for h in hits] == ["brainstorming"]
    everything = search_library(store, "abstract")
    assert [h[0] for h in everything] == ["brainstorming", "solo-review"]
    assert search_library(store, "abstract", ["nonexistent-tag"]) == []


def test_search_ignores_other_kinds(store, environment):
    save_artifact(store, brainstorming_entry())
    save_artifact(
        store,
        LibraryEntry(id="env", kind="environment", document=environment.to_dict()),
    )
    assert [h[0] for h in search_library(store, "environment")] == ["env"]
