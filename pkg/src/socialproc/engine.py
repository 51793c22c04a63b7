"""Run-time execution of social processes.

A process is an implemented protocol plus a role-to-collaborator
assignment, a boolean marking of active states, and an append-only
trace. Firing follows elementary-net semantics: an activity is enabled
when all its input states are active; it may actually fire only if no
output state is already active unless that state is also an input
(the contact condition; self-loops stay active and repeatable).

Each process is a single-writer lane: every mutation takes the process
lock, reads take consistent snapshots.
"""

from __future__ import annotations

import copy
import logging
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Any, Callable, Iterable, Mapping, Protocol, Sequence

from .environment import SocialEnvironment
from .errors import (
    ContactViolation,
    IncompleteMapping,
    NotEnabled,
    ProcessNotRunning,
    ProtocolInvalid,
    ReplayDivergence,
    UnassignedRole,
    UnknownCollaborator,
    UnknownResource,
    UnknownRole,
)
from .implementation import (
    ActionDescriptor,
    ImplementedSocialProtocol,
    completeness_report,
    descriptor_from_dict,
)
from .model import AbstractInteractionProtocol, validate_abstract_protocol
from .report import INFO, ValidationReport, Violation

logger = logging.getLogger(__name__)

RUNNING = "running"
PAUSED = "paused"
COMPLETED = "completed"

RoleAssignment = dict[str, set[str]]
EffectAdapter = Callable[["Event", ActionDescriptor], None]


class Clock(Protocol):
    def now(self) -> datetime: ...


class SystemClock:
    def now(self) -> datetime:
        return datetime.now(timezone.utc)


@dataclass
class StepClock:
    """Deterministic clock: each call advances by a fixed step."""

    start: datetime = datetime(2020, 1, 1, tzinfo=timezone.utc)
    step: timedelta = timedelta(seconds=1)
    ticks: int = 0

    def now(self) -> datetime:
        value = self.start + self.ticks * self.step
        self.ticks += 1
        return value


@dataclass(frozen=True)
class Event:
    """Audit record of one firing."""

    seq: int
    timestamp: str
    collaborator: str
    activity: str
    consumed: tuple[str, ...]
    produced: tuple[str, ...]
    payload: dict[str, str] | None = None
    action: ActionDescriptor | None = None

    def to_dict(self) -> dict:
        return {
            "kind": "fire",
            "seq": self.seq,
            "timestamp": self.timestamp,
            "collaborator": self.collaborator,
            "activity": self.activity,
            "consumed": list(self.consumed),
            "produced": list(self.produced),
            "payload": dict(self.payload) if self.payload is not None else None,
            "action": self.action.to_dict() if self.action is not None else None,
        }


def event_from_dict(doc: dict) -> Event:
    return Event(
        seq=doc["seq"],
        timestamp=doc["timestamp"],
        collaborator=doc["collaborator"],
        activity=doc["activity"],
        consumed=tuple(doc.get("consumed", [])),
        produced=tuple(doc.get("produced", [])),
        payload=dict(doc["payload"]) if doc.get("payload") is not None else None,
        action=descriptor_from_dict(doc["action"]) if doc.get("action") is not None else None,
    )


@dataclass(frozen=True)
class ProcessSnapshot:
    marking: frozenset[str]
    status: str
    assignment: dict[str, frozenset[str]]
    trace_len: int


@dataclass
class SocialProcess:
    id: str
    protocol: ImplementedSocialProtocol
    assignment: RoleAssignment
    marking: set[str]
    status: str = RUNNING
    trace: list = field(default_factory=list)
    clock: Clock = field(default_factory=SystemClock, repr=False, compare=False)
    pending_meta: Any = field(default=None, repr=False, compare=False)
    lock: threading.RLock = field(
        default_factory=threading.RLock, init=False, repr=False, compare=False
    )

    @property
    def interaction(self) -> AbstractInteractionProtocol:
        return self.protocol.abstract.interaction

    def next_seq(self) -> int:
        return len(self.trace) + 1

    def assigned_collaborators(self) -> set[str]:
        return {m for group in self.assignment.values() for m in group}


# ---------------------------------------------------------------------------
# Firing primitives, shared by fire/replay/reachability


def structurally_enabled(
    interaction: AbstractInteractionProtocol, marking: frozenset[str] | set[str], activity_id: str
) -> bool:
    return interaction.inputs_of(activity_id) <= set(marking)


def contact_free(
    interaction: AbstractInteractionProtocol, marking: frozenset[str] | set[str], activity_id: str
) -> bool:
    inputs = interaction.inputs_of(activity_id)
    outputs = interaction.outputs_of(activity_id)
    return not ((outputs - inputs) & set(marking))


def try_fire_marking(
    interaction: AbstractInteractionProtocol, marking: frozenset[str], activity_id: str
) -> frozenset[str] | None:
    """Next marking if the activity can fire here, else None."""
    inputs = interaction.inputs_of(activity_id)
    outputs = interaction.outputs_of(activity_id)
    if not inputs <= marking:
        return None
    if (outputs - inputs) & marking:
        return None
    return (marking - inputs) | outputs


def reachable_markings(
    interaction: AbstractInteractionProtocol, limit: int | None = None
) -> set[frozenset[str]]:
    """All markings reachable from the initial one, roles ignored.

    Breadth-first exploration with the engine's own firing rule; mainly
    an analysis hook (the test suite holds an independent oracle).
    """
    from collections import deque

    initial = interaction.initial_marking()
    seen = {initial}
    queue = deque([initial])
    activity_ids = sorted(interaction.activity_ids())
    while queue:
        marking = queue.popleft()
        for aid in activity_ids:
            nxt = try_fire_marking(interaction, marking, aid)
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
                if limit is not None and len(seen) >= limit:
                    return seen
    return seen


# ---------------------------------------------------------------------------
# Instantiation


def validate_assignment(
    protocol: ImplementedSocialProtocol,
    assignment: Mapping[str, Iterable[str]],
    environment: SocialEnvironment,
) -> ValidationReport:
    """Check a role->collaborators mapping against protocol and environment.

    A collaborator holding several roles is legal but reported at info
    severity so inspection surfaces it.
    """
    violations: list[Violation] = []
    network_roles = protocol.abstract.network.role_ids()
    referenced = {a.role for a in protocol.abstract.interaction.activities}
    for role in sorted(referenced):
        if not set(assignment.get(role, ())):
            violations.append(
                Violation("unassigned-role", role, "role referenced by activities has no members")
            )
    members_seen: dict[str, list[str]] = {}
    for role in sorted(assignment):
        if role not in network_roles:
            violations.append(
                Violation("unknown-role", role, "assignment key is not a role in the network")
            )
        for member in sorted(set(assignment[role])):
            members_seen.setdefault(member, []).append(role)
            if not environment.is_person(member):
                violations.append(
                    Violation(
                        "unknown-collaborator",
                        member,
                        "collaborator is not a person in the environment",
                    )
                )
    for member, roles in sorted(members_seen.items()):
        if len(roles) > 1:
            violations.append(
                Violation(
                    "multi-role-collaborator",
                    member,
                    f"collaborator holds several roles: {', '.join(roles)}",
                    severity=INFO,
                )
            )
    return ValidationReport.build(violations)


def _check_protocol_ready(
    protocol: ImplementedSocialProtocol, environment: SocialEnvironment
) -> None:
    report = validate_abstract_protocol(protocol.abstract)
    if not report.ok:
        raise ProtocolInvalid("abstract protocol invalid", report)
    completeness = completeness_report(protocol.abstract, protocol.resource_map, protocol.activity_map)
    if not completeness.ok:
        raise IncompleteMapping(
            "protocol mappings incomplete",
            completeness,
            ids=[v.element for v in completeness.errors()],
        )
    missing = sorted(
        {t for t in protocol.resource_map.values() if not environment.has_resource(t)}
    )
    if missing:
        raise UnknownResource(
            f"mapped resources absent from environment: {', '.join(missing)}", missing
        )


def instantiate(
    protocol: ImplementedSocialProtocol,
    assignment: Mapping[str, Iterable[str]],
    environment: SocialEnvironment,
    process_id: str | None = None,
    clock: Clock | None = None,
) -> SocialProcess:
    """Create a running process from an implemented protocol.

    The process gets a private copy of the protocol (run-time adaptation
    must touch only this instance), the marking of all initial states,
    and an empty trace. The environment is enriched with collaboration
    relations among the assigned members.
    """
    _check_protocol_ready(protocol, environment)
    report = validate_assignment(protocol, assignment, environment)
    unassigned = [v.element for v in report.errors() if v.rule == "unassigned-role"]
    if unassigned:
        raise UnassignedRole(f"roles without members: {', '.join(unassigned)}", unassigned)
    unknown_members = [v.element for v in report.errors() if v.rule == "unknown-collaborator"]
    if unknown_members:
        raise UnknownCollaborator(
            f"unknown collaborators: {', '.join(sorted(set(unknown_members)))}",
            sorted(set(unknown_members)),
        )
    unknown_roles = [v.element for v in report.errors() if v.rule == "unknown-role"]
    if unknown_roles:
        raise UnknownRole(
            f"assignment names roles absent from the network: {', '.join(unknown_roles)}",
            unknown_roles,
        )
    process = SocialProcess(
        id=process_id or f"proc-{uuid.uuid4().hex[:8]}",
        protocol=copy.deepcopy(protocol),
        assignment={role: set(members) for role, members in assignment.items()},
        marking=set(protocol.abstract.interaction.initial_marking()),
        status=RUNNING,
        clock=clock or SystemClock(),
    )
    _refresh_completion(process)
    environment.enrich_from_process(process)
    return process


# ---------------------------------------------------------------------------
# Execution


def enabled_activities(process: SocialProcess, collaborator: str) -> list[str]:
    """Activities the collaborator may fire at the current marking.

    Listed iff every input state is active and the collaborator is
    assigned to the activity's role. The contact condition is not part
    of enablement; it is checked at fire time. Empty when the process is
    not running.
    """
    with process.lock:
        if collaborator not in process.assigned_collaborators():
            raise UnknownCollaborator(
                f"{collaborator!r} is not assigned to this process", [collaborator]
            )
        if process.status != RUNNING:
            return []
        marking = frozenset(process.marking)
        interaction = process.interaction
        result = []
        for activity in interaction.activities:
            if collaborator not in process.assignment.get(activity.role, ()):
                continue
            if structurally_enabled(interaction, marking, activity.id):
                result.append(activity.id)
        return sorted(result)


def fire(
    process: SocialProcess,
    collaborator: str,
    activity_id: str,
    payload: Mapping[str, str] | None = None,
    effect: EffectAdapter | None = None,
) -> Event:
    """Fire an activity: consume input states, produce output states.

    Self-loop states remain active. On success the event is appended to
    the trace and, when the new marking is a nonempty subset of final
    states, the process completes. The payload is opaque to the engine.
    """
    with process.lock:
        if process.status != RUNNING:
            raise ProcessNotRunning(f"process {process.id} is {process.status}", [process.id])
        interaction = process.interaction
        activity = interaction.activity(activity_id)
        if activity is None:
            raise NotEnabled(f"unknown activity {activity_id!r}", [activity_id])
        if collaborator not in process.assignment.get(activity.role, ()):
            raise NotEnabled(
                f"{collaborator!r} does not hold role {activity.role!r}", [activity_id]
            )
        marking = frozenset(process.marking)
        if not structurally_enabled(interaction, marking, activity_id):
            missing = sorted(interaction.inputs_of(activity_id) - marking)
            raise NotEnabled(
                f"inactive input states: {', '.join(missing)}", [activity_id, *missing]
            )
        inputs = interaction.inputs_of(activity_id)
        outputs = interaction.outputs_of(activity_id)
        blocked = sorted((outputs - inputs) & marking)
        if blocked:
            raise ContactViolation(
                f"output states already active: {', '.join(blocked)}", [activity_id, *blocked]
            )
        process.marking = set((marking - inputs) | outputs)
        event = Event(
            seq=process.next_seq(),
            timestamp=process.clock.now().isoformat(),
            collaborator=collaborator,
            activity=activity_id,
            consumed=tuple(sorted(inputs)),
            produced=tuple(sorted(outputs)),
            payload=dict(payload) if payload else None,
            action=process.protocol.activity_map.get(activity_id),
        )
        process.trace.append(event)
        _refresh_completion(process)
    if effect is not None and event.action is not None:
        try:
            effect(event, event.action)
        except Exception:
            # Effects are best-effort; the trace already holds the record.
            logger.exception("effect adapter failed for %s/%s", process.id, activity_id)
    return event


def _refresh_completion(process: SocialProcess) -> None:
    finals = process.interaction.final_state_ids()
    if process.marking and set(process.marking) <= finals:
        process.status = COMPLETED


def snapshot(process: SocialProcess) -> ProcessSnapshot:
    """Point-in-time immutable view, unaffected by later firings."""
    with process.lock:
        return ProcessSnapshot(
            marking=frozenset(process.marking),
            status=process.status,
            assignment={role: frozenset(members) for role, members in process.assignment.items()},
            trace_len=len(process.trace),
        )


# ---------------------------------------------------------------------------
# Replay


def replay_trace(
    protocol: ImplementedSocialProtocol,
    assignment: Mapping[str, Iterable[str]],
    trace: Sequence[Event],
    initial_marking: Iterable[str] | None = None,
) -> frozenset[str]:
    """Re-derive the marking a trace of firings leads to.

    Starts from the protocol's initial marking (or an explicit one, for
    replaying a segment between adaptations) and re-checks the legality
    of every event: contiguous sequence numbers, role membership,
    enablement, contact condition, and recorded consumed/produced sets.
    """
    interaction = protocol.abstract.interaction
    marking = (
        frozenset(initial_marking) if initial_marking is not None else interaction.initial_marking()
    )
    expected_seq: int | None = None
    for entry in trace:
        if not isinstance(entry, Event):
            seq = getattr(entry, "seq", -1)
            raise ReplayDivergence(f"entry {seq} is not a firing event", seq)
        if expected_seq is None:
            if entry.seq < 1:
                raise ReplayDivergence(f"sequence numbers start at 1, got {entry.seq}", entry.seq)
            expected_seq = entry.seq
        if entry.seq != expected_seq:
            raise ReplayDivergence(
                f"expected sequence {expected_seq}, got {entry.seq}", entry.seq
            )
        activity = interaction.activity(entry.activity)
        if activity is None:
            raise ReplayDivergence(f"unknown activity {entry.activity!r}", entry.seq)
        if entry.collaborator not in set(assignment.get(activity.role, ())):
            raise ReplayDivergence(
                f"{entry.collaborator!r} did not hold role {activity.role!r}", entry.seq
            )
        nxt = try_fire_marking(interaction, marking, entry.activity)
        if nxt is None:
            raise ReplayDivergence(
                f"activity {entry.activity!r} was not fireable at {sorted(marking)}", entry.seq
            )
        inputs = interaction.inputs_of(entry.activity)
        outputs = interaction.outputs_of(entry.activity)
        if tuple(sorted(inputs)) != entry.consumed or tuple(sorted(outputs)) != entry.produced:
            raise ReplayDivergence("recorded consumed/produced sets diverge", entry.seq)
        marking = nxt
        expected_seq += 1
    return marking
