"""Process interchange documents and trace reconstruction.

A process document references its implemented protocol by id; the trace
(with embedded adaptation transactions) makes the document
self-contained: replaying it against the stored protocol reconstructs
the current net, assignment, and marking.
"""

from __future__ import annotations

from .adaptation import AdaptationRecord, record_from_dict, replay_process
from .engine import (
    COMPLETED,
    PAUSED,
    RUNNING,
    Clock,
    Event,
    SocialProcess,
    SystemClock,
    event_from_dict,
)
from .errors import CorruptDocument, ReplayDivergence
from .implementation import ImplementedSocialProtocol

STATUSES = (RUNNING, PAUSED, COMPLETED)


def trace_entry_from_dict(doc: dict) -> Event | AdaptationRecord:
    kind = doc.get("kind", "fire")
    if kind == "fire":
        return event_from_dict(doc)
    if kind == "adaptation":
        return record_from_dict(doc)
    raise ValueError(f"unknown trace entry kind {kind!r}")


def process_to_dict(process: SocialProcess) -> dict:
    with process.lock:
        return {
            "id": process.id,
            "implemented_protocol_id": process.protocol.id,
            "assignment": {
                role: sorted(members) for role, members in sorted(process.assignment.items())
            },
            "marking": sorted(process.marking),
            "status": process.status,
            "trace": [entry.to_dict() for entry in process.trace],
        }


def process_from_dict(
    doc: dict,
    protocol: ImplementedSocialProtocol,
    clock: Clock | None = None,
    verify: bool = True,
) -> SocialProcess:
    """Rebuild a live process from its document and stored protocol.

    The trace is replayed from the protocol's initial marking through
    every adaptation boundary; when ``verify`` is set, the replayed
    marking and assignment must match the document or the document is
    rejected as corrupt.
    """
    if doc.get("status") not in STATUSES:
        raise CorruptDocument(f"unknown status {doc.get('status')!r}", [str(doc.get("id"))])
    trace = [trace_entry_from_dict(entry) for entry in doc.get("trace", [])]
    base_assignment = {role: set(members) for role, members in doc.get("assignment", {}).items()}
    for entry in trace:
        if isinstance(entry, AdaptationRecord):
            base_assignment = {
                role: set(members) for role, members in entry.prior_assignment.items()
            }
            break
    try:
        marking, current_protocol, assignment = replay_process(protocol, base_assignment, trace)
    except ReplayDivergence as exc:
        raise CorruptDocument(f"trace does not replay: {exc}", [str(doc.get("id"))])
    if verify:
        if set(doc.get("marking", [])) != set(marking):
            raise CorruptDocument("document marking diverges from replayed trace", [doc["id"]])
        recorded = {role: set(members) for role, members in doc.get("assignment", {}).items()}
        if recorded != assignment:
            raise CorruptDocument("document assignment diverges from replayed trace", [doc["id"]])
    process = SocialProcess(
        id=doc["id"],
        protocol=current_protocol,
        assignment=assignment,
        marking=set(doc.get("marking", marking)),
        status=doc["status"],
        trace=trace,
        clock=clock or SystemClock(),
    )
    return process
