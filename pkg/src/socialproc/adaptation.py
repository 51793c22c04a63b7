"""Run-time adaptation of live processes.

A running process is modified through an atomic edit transaction:
edits are applied in order to a working copy, the result must pass full
validation (net structure, cross references, mapping completeness,
assignment totality), active states removed by the edits are migrated
per an explicit map, and only then is the working copy committed. On
any failure the process is untouched.

Adaptations are normally decided through a meta-process: a social
process over a deliberation protocol attached to a target process pi,
which stays paused until the decision. The built-in deliberation
protocol is minimal (propose/accept/reject); any protocol tagged "meta"
may serve instead, as long as it uses the same activity ids for
proposing and deciding.
"""

from __future__ import annotations

import copy
import json
import logging
import uuid
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .engine import (
    COMPLETED,
    PAUSED,
    RUNNING,
    Clock,
    Event,
    SocialProcess,
    instantiate,
    replay_trace,
)
from .environment import SocialEnvironment
from .errors import (
    AdaptationInProgress,
    IllegalTransition,
    MetaNotDecided,
    MigrationMissing,
    ProcessNotPaused,
    ProcessNotRunning,
    ReplayDivergence,
    TransactionInvalid,
)
from .implementation import (
    ActionDescriptor,
    ImplementedSocialProtocol,
    completeness_report,
    descriptor_from_dict,
    manual_action,
    protocol_version,
)
from .model import (
    ROLE,
    AbstractActivity,
    AbstractInteractionProtocol,
    AbstractResource,
    AbstractSocialNetwork,
    AbstractSocialProtocol,
    Edge,
    StateNode,
    cross_reference_report,
    validate_interaction_protocol,
)
from .report import ValidationReport, Violation

logger = logging.getLogger(__name__)

DROP = None  # marking_migration value for "remove without replacement"

META_TAG = "meta"
META_INITIATOR = "initiator"
META_DECIDER = "decider"
PROPOSE_ACTIVITY = "propose-change"
ACCEPT_ACTIVITY = "accept"
REJECT_ACTIVITY = "reject"
PROPOSAL_PAYLOAD_KEY = "transaction"

PENDING = "pending"
ACCEPTED = "accepted"
REJECTED = "rejected"


# ---------------------------------------------------------------------------
# Edits


@dataclass(frozen=True)
class AddState:
    state: StateNode

    def to_dict(self) -> dict:
        return {"op": "add_state", "state": self.state.to_dict()}


@dataclass(frozen=True)
class RemoveState:
    state_id: str

    def to_dict(self) -> dict:
        return {"op": "remove_state", "id": self.state_id}


@dataclass(frozen=True)
class AddActivity:
    activity: AbstractActivity
    action: ActionDescriptor

    def to_dict(self) -> dict:
        return {
            "op": "add_activity",
            "activity": self.activity.to_dict(),
            "action": self.action.to_dict(),
        }


@dataclass(frozen=True)
class RemoveActivity:
    activity_id: str

    def to_dict(self) -> dict:
        return {"op": "remove_activity", "id": self.activity_id}


@dataclass(frozen=True)
class AddEdge:
    source: str
    target: str

    def to_dict(self) -> dict:
        return {"op": "add_edge", "from": self.source, "to": self.target}


@dataclass(frozen=True)
class RemoveEdge:
    source: str
    target: str

    def to_dict(self) -> dict:
        return {"op": "remove_edge", "from": self.source, "to": self.target}


@dataclass(frozen=True)
class ReassignRole:
    role: str
    collaborators: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "op": "reassign_role",
            "role": self.role,
            "collaborators": sorted(self.collaborators),
        }


@dataclass(frozen=True)
class RemapActivity:
    activity_id: str
    action: ActionDescriptor

    def to_dict(self) -> dict:
        return {
            "op": "remap_activity",
            "activity_id": self.activity_id,
            "action": self.action.to_dict(),
        }


Edit = Union[
    AddState, RemoveState, AddActivity, RemoveActivity, AddEdge, RemoveEdge, ReassignRole, RemapActivity
]


def edit_from_dict(doc: dict) -> Edit:
    op = doc.get("op")
    if op == "add_state":
        s = doc["state"]
        return AddState(
            StateNode(
                id=s["id"],
                label=s.get("label", ""),
                is_initial=bool(s.get("is_initial", False)),
                is_final=bool(s.get("is_final", False)),
            )
        )
    if op == "remove_state":
        return RemoveState(doc["id"])
    if op == "add_activity":
        a = doc["activity"]
        return AddActivity(
            AbstractActivity(id=a["id"], label=a.get("label", ""), role=a["role"], tool=a.get("tool")),
            descriptor_from_dict(doc["action"]),
        )
    if op == "remove_activity":
        return RemoveActivity(doc["id"])
    if op == "add_edge":
        return AddEdge(doc["from"], doc["to"])
    if op == "remove_edge":
        return RemoveEdge(doc["from"], doc["to"])
    if op == "reassign_role":
        return ReassignRole(doc["role"], tuple(doc["collaborators"]))
    if op == "remap_activity":
        return RemapActivity(doc["activity_id"], descriptor_from_dict(doc["action"]))
    raise ValueError(f"unknown edit op {op!r}")


@dataclass
class EditTransaction:
    """Atomic batch of edits plus migration for removed active states.

    marking_migration maps a removed state id to its replacement, or to
    None for an explicit drop.
    """

    target_process_id: str
    edits: list[Edit] = field(default_factory=list)
    marking_migration: dict[str, str | None] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "target_process_id": self.target_process_id,
            "edits": [e.to_dict() for e in self.edits],
            "marking_migration": dict(sorted(self.marking_migration.items())),
        }


def transaction_from_dict(doc: dict) -> EditTransaction:
    return EditTransaction(
        target_process_id=doc["target_process_id"],
        edits=[edit_from_dict(e) for e in doc.get("edits", [])],
        marking_migration=dict(doc.get("marking_migration", {})),
    )


@dataclass(frozen=True)
class AdaptationRecord:
    """Trace entry marking a protocol version boundary."""

    seq: int
    timestamp: str
    transaction: EditTransaction
    prior_version: str
    new_version: str
    prior_assignment: dict[str, tuple[str, ...]]

    def to_dict(self) -> dict:
        return {
            "kind": "adaptation",
            "seq": self.seq,
            "timestamp": self.timestamp,
            "transaction": self.transaction.to_dict(),
            "prior_version": self.prior_version,
            "new_version": self.new_version,
            "prior_assignment": {
                role: list(members) for role, members in sorted(self.prior_assignment.items())
            },
        }


def record_from_dict(doc: dict) -> AdaptationRecord:
    return AdaptationRecord(
        seq=doc["seq"],
        timestamp=doc["timestamp"],
        transaction=transaction_from_dict(doc["transaction"]),
        prior_version=doc["prior_version"],
        new_version=doc["new_version"],
        prior_assignment={
            role: tuple(members) for role, members in doc.get("prior_assignment", {}).items()
        },
    )


# ---------------------------------------------------------------------------
# Status control


def set_process_status(process: SocialProcess, status: str) -> None:
    """Flip a process between running and paused.

    Only running<->paused transitions are legal; resuming is refused
    while a meta-process holds the target.
    """
    with process.lock:
        current = process.status
        if (current, status) not in {(RUNNING, PAUSED), (PAUSED, RUNNING)}:
            raise IllegalTransition(f"cannot move process from {current} to {status}", [process.id])
        if status == RUNNING and process.pending_meta is not None:
            raise AdaptationInProgress(
                f"process {process.id} is held by meta-process {process.pending_meta.id}",
                [process.id, process.pending_meta.id],
            )
        process.status = status


# ---------------------------------------------------------------------------
# Transaction application


def _positional_error(rule: str, element: str, message: str) -> TransactionInvalid:
    report = ValidationReport.build([Violation(rule, element, message)])
    return TransactionInvalid(message, report, ids=[element])


def _apply_edits(
    protocol: ImplementedSocialProtocol,
    assignment: Mapping[str, Iterable[str]],
    marking: Iterable[str],
    txn: EditTransaction,
) -> tuple[ImplementedSocialProtocol, dict[str, set[str]], set[str]]:
    """Apply edits to deep copies; raises, never mutates the inputs.

    References are resolved at the edit's position, so a state added by
    an earlier edit is a legal edge endpoint for a later one. Migration
    replacements join the marking after all edits, letting a replacement
    state be added anywhere in the batch.
    """
    if not txn.edits:
        raise _positional_error("empty-transaction", "", "transaction carries no edits")
    work = copy.deepcopy(protocol)
    interaction = work.abstract.interaction
    new_assignment = {role: set(members) for role, members in assignment.items()}
    new_marking = set(marking)
    arriving: set[str] = set()

    for position, edit in enumerate(txn.edits):
        where = f"edit {position}"
        if isinstance(edit, AddState):
            if edit.state.id in interaction.state_ids() | interaction.activity_ids():
                raise _positional_error(
                    "duplicate-id", edit.state.id, f"{where}: node id already present"
                )
            interaction.states.append(edit.state)
        elif isinstance(edit, RemoveState):
            if edit.state_id not in interaction.state_ids():
                raise _positional_error(
                    "unresolvable-ref", edit.state_id, f"{where}: unknown state"
                )
            if edit.state_id in new_marking:
                if edit.state_id not in txn.marking_migration:
                    raise MigrationMissing(
                        f"state {edit.state_id!r} is active and has no migration entry",
                        [edit.state_id],
                    )
                replacement = txn.marking_migration[edit.state_id]
                if replacement is not None:
                    arriving.add(replacement)
                new_marking.discard(edit.state_id)
            interaction.states = [s for s in interaction.states if s.id != edit.state_id]
            interaction.edges = [
                e for e in interaction.edges if edit.state_id not in (e.source, e.target)
            ]
        elif isinstance(edit, AddActivity):
            if edit.activity.id in interaction.state_ids() | interaction.activity_ids():
                raise _positional_error(
                    "duplicate-id", edit.activity.id, f"{where}: node id already present"
                )
            interaction.activities.append(edit.activity)
            work.activity_map[edit.activity.id] = edit.action
        elif isinstance(edit, RemoveActivity):
            if edit.activity_id not in interaction.activity_ids():
                raise _positional_error(
                    "unresolvable-ref", edit.activity_id, f"{where}: unknown activity"
                )
            interaction.activities = [
                a for a in interaction.activities if a.id != edit.activity_id
            ]
            interaction.edges = [
                e for e in interaction.edges if edit.activity_id not in (e.source, e.target)
            ]
            work.activity_map.pop(edit.activity_id, None)
        elif isinstance(edit, AddEdge):
            known = interaction.state_ids() | interaction.activity_ids()
            for endpoint in (edit.source, edit.target):
                if endpoint not in known:
                    raise _positional_error(
                        "unresolvable-ref", endpoint, f"{where}: unknown edge endpoint"
                    )
            if any(e.source == edit.source and e.target == edit.target for e in interaction.edges):
                raise _positional_error(
                    "duplicate-edge", f"{edit.source}->{edit.target}", f"{where}: edge already present"
                )
            interaction.edges.append(Edge(source=edit.source, target=edit.target))
        elif isinstance(edit, RemoveEdge):
            before = len(interaction.edges)
            interaction.edges = [
                e
                for e in interaction.edges
                if not (e.source == edit.source and e.target == edit.target)
            ]
            if len(interaction.edges) == before:
                raise _positional_error(
                    "unresolvable-ref", f"{edit.source}->{edit.target}", f"{where}: unknown edge"
                )
        elif isinstance(edit, ReassignRole):
            if edit.role not in work.abstract.network.role_ids():
                raise _positional_error(
                    "unresolvable-ref", edit.role, f"{where}: unknown role"
                )
            if not edit.collaborators:
                raise _positional_error(
                    "empty-collaborator-set", edit.role, f"{where}: role needs at least one member"
                )
            new_assignment[edit.role] = set(edit.collaborators)
        elif isinstance(edit, RemapActivity):
            if edit.activity_id not in interaction.activity_ids():
                raise _positional_error(
                    "unresolvable-ref", edit.activity_id, f"{where}: unknown activity"
                )
            work.activity_map[edit.activity_id] = edit.action
        else:
            raise _positional_error("unknown-edit", str(type(edit)), f"{where}: unknown edit kind")

    missing_targets = sorted(arriving - interaction.state_ids())
    if missing_targets:
        raise _positional_error(
            "migration-target-unknown",
            missing_targets[0],
            f"migration replacement states missing from the net: {', '.join(missing_targets)}",
        )
    new_marking |= arriving
    return work, new_assignment, new_marking


def _post_edit_report(
    protocol: ImplementedSocialProtocol,
    assignment: Mapping[str, set[str]],
    marking: set[str],
    environment: SocialEnvironment | None,
) -> ValidationReport:
    interaction = protocol.abstract.interaction
    report = validate_interaction_protocol(interaction)
    report = report.merged(cross_reference_report(protocol.abstract.network, interaction))
    report = report.merged(
        completeness_report(protocol.abstract, protocol.resource_map, protocol.activity_map)
    )
    violations: list[Violation] = []
    referenced = {a.role for a in interaction.activities}
    for role in sorted(referenced):
        if not assignment.get(role):
            violations.append(
                Violation("unassigned-role", role, "role referenced by activities has no members")
            )
    if environment is not None:
        for role in sorted(assignment):
            for member in sorted(assignment[role]):
                if not environment.is_person(member):
                    violations.append(
                        Violation(
                            "unknown-collaborator",
                            member,
                            "collaborator is not a person in the environment",
                        )
                    )
    for state_id in sorted(marking - interaction.state_ids()):
        violations.append(
            Violation("marking-outside-net", state_id, "marked state is not part of the net")
        )
    return report.merged(ValidationReport.build(violations))


def apply_transaction(
    process: SocialProcess,
    txn: EditTransaction,
    environment: SocialEnvironment | None = None,
) -> AdaptationRecord:
    """Apply an edit transaction to a paused process, all-or-nothing.

    The working copy must pass full validation before it replaces the
    live state; otherwise the process is left bit-identical. A version
    boundary record (transaction, prior/new content hashes, prior
    assignment) is appended to the trace. Collaborator existence is only
    checked when an environment is supplied.
    """
    with process.lock:
        if process.status != PAUSED:
            raise ProcessNotPaused(
                f"process {process.id} must be paused for adaptation", [process.id]
            )
        if txn.target_process_id != process.id:
            raise _positional_error(
                "target-mismatch",
                txn.target_process_id,
                f"transaction targets {txn.target_process_id!r}, not {process.id!r}",
            )
        work, new_assignment, new_marking = _apply_edits(
            process.protocol, process.assignment, process.marking, txn
        )
        report = _post_edit_report(work, new_assignment, new_marking, environment)
        if not report.ok:
            raise TransactionInvalid(
                "edited process failed validation", report, ids=report.rules()
            )
        record = AdaptationRecord(
            seq=process.next_seq(),
            timestamp=process.clock.now().isoformat(),
            transaction=copy.deepcopy(txn),
            prior_version=protocol_version(process.protocol),
            new_version=protocol_version(work),
            prior_assignment={
                role: tuple(sorted(members)) for role, members in sorted(process.assignment.items())
            },
        )
        process.protocol = work
        process.assignment = new_assignment
        process.marking = new_marking
        process.trace.append(record)
        return record


# ---------------------------------------------------------------------------
# Meta-processes


def builtin_meta_protocol(protocol_id: str = "meta-protocol") -> ImplementedSocialProtocol:
    """The minimal deliberation protocol: propose, then accept or reject."""
    network = AbstractSocialNetwork(
        resources=[
            AbstractResource(id=META_INITIATOR, kind=ROLE, label="Change initiator"),
            AbstractResource(id=META_DECIDER, kind=ROLE, label="Change decider"),
        ],
    )
    interaction = AbstractInteractionProtocol(
        states=[
            StateNode(id="deliberating", label="Deliberating", is_initial=True),
            StateNode(id="decided", label="Decided", is_final=True),
        ],
        activities=[
            AbstractActivity(id=PROPOSE_ACTIVITY, label="Propose a change", role=META_INITIATOR),
            AbstractActivity(id=ACCEPT_ACTIVITY, label="Accept the proposal", role=META_DECIDER),
            AbstractActivity(id=REJECT_ACTIVITY, label="Reject the proposal", role=META_DECIDER),
        ],
        edges=[
            Edge("deliberating", PROPOSE_ACTIVITY),
            Edge(PROPOSE_ACTIVITY, "deliberating"),
            Edge("deliberating", ACCEPT_ACTIVITY),
            Edge(ACCEPT_ACTIVITY, "decided"),
            Edge("deliberating", REJECT_ACTIVITY),
            Edge(REJECT_ACTIVITY, "decided"),
        ],
    )
    abstract = AbstractSocialProtocol(
        id=f"{protocol_id}-abstract",
        network=network,
        interaction=interaction,
        tags={META_TAG},
    )
    return ImplementedSocialProtocol(
        id=protocol_id,
        abstract=abstract,
        resource_map={},
        activity_map={
            PROPOSE_ACTIVITY: manual_action(),
            ACCEPT_ACTIVITY: manual_action(),
            REJECT_ACTIVITY: manual_action(),
        },
    )


@dataclass
class MetaProcess:
    """A deliberation process attached to a target process pi."""

    id: str
    process: SocialProcess
    target: SocialProcess
    outcome: str = PENDING

    @property
    def proposed_transaction(self) -> EditTransaction | None:
        """Parse the latest proposal carried in a propose-change payload."""
        for entry in reversed(self.process.trace):
            if isinstance(entry, Event) and entry.activity == PROPOSE_ACTIVITY:
                raw = (entry.payload or {}).get(PROPOSAL_PAYLOAD_KEY)
                if raw is None:
                    return None
                try:
                    return transaction_from_dict(json.loads(raw))
                except (ValueError, KeyError, TypeError):
                    logger.warning("meta %s carries an unparsable proposal", self.id)
                    return None
        return None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "target_process_id": self.target.id,
            "outcome": self.outcome,
        }


def start_meta_process(
    target: SocialProcess,
    participants: Mapping[str, Iterable[str]],
    environment: SocialEnvironment,
    protocol: ImplementedSocialProtocol | None = None,
    meta_id: str | None = None,
    clock: Clock | None = None,
) -> MetaProcess:
    """Open an adaptation on a running process, pausing it meanwhile.

    One live meta-process per target. The deliberation runs on the
    built-in protocol unless a protocol tagged "meta" is supplied.
    """
    proto = protocol if protocol is not None else builtin_meta_protocol()
    if META_TAG not in proto.abstract.tags:
        raise ValueError("meta-process protocols must carry the 'meta' tag")
    with target.lock:
        if target.pending_meta is not None:
            raise AdaptationInProgress(
                f"target {target.id} already has meta-process {target.pending_meta.id}",
                [target.id, target.pending_meta.id],
            )
        if target.status != RUNNING:
            raise ProcessNotRunning(f"target {target.id} is {target.status}", [target.id])
        mid = meta_id or f"meta-{target.id}-{uuid.uuid4().hex[:6]}"
        deliberation = instantiate(
            proto,
            participants,
            environment,
            process_id=mid,
            clock=clock or target.clock,
        )
        target.status = PAUSED
        meta = MetaProcess(id=mid, process=deliberation, target=target)
        target.pending_meta = meta
        return meta


def conclude_meta_process(
    meta: MetaProcess, environment: SocialEnvironment | None = None
) -> str:
    """Close a decided meta-process and release its target.

    accept with a proposal applies the transaction; reject, or accept
    without a usable proposal, releases the target unchanged. The target
    resumes either way (or completes, if the migrated marking is final).
    Raises the transaction failure when an accepted proposal does not
    validate; the target is still released.
    """
    if meta.outcome != PENDING:
        raise IllegalTransition(f"meta-process {meta.id} already concluded", [meta.id])
    if meta.process.status != COMPLETED:
        raise MetaNotDecided(f"meta-process {meta.id} has not reached a decision", [meta.id])
    decision = None
    for entry in reversed(meta.process.trace):
        if isinstance(entry, Event) and entry.activity in (ACCEPT_ACTIVITY, REJECT_ACTIVITY):
            decision = entry.activity
            break
    target = meta.target
    with target.lock:
        try:
            if decision == ACCEPT_ACTIVITY:
                txn = meta.proposed_transaction
                if txn is None:
                    logger.info("meta %s accepted without a proposal; treating as reject", meta.id)
                    meta.outcome = REJECTED
                else:
                    apply_transaction(target, txn, environment)
                    meta.outcome = ACCEPTED
            else:
                meta.outcome = REJECTED
        except (TransactionInvalid, MigrationMissing):
            meta.outcome = REJECTED
            raise
        finally:
            target.pending_meta = None
            if target.status == PAUSED:
                finals = target.interaction.final_state_ids()
                if target.marking and set(target.marking) <= finals:
                    target.status = COMPLETED
                else:
                    target.status = RUNNING
    return meta.outcome


# ---------------------------------------------------------------------------
# Replay across version boundaries


def replay_process(
    base_protocol: ImplementedSocialProtocol,
    base_assignment: Mapping[str, Iterable[str]],
    trace: Sequence,
    initial_marking: Iterable[str] | None = None,
) -> tuple[frozenset[str], ImplementedSocialProtocol, dict[str, set[str]]]:
    """Replay a full trace, including adaptation boundaries.

    Firing segments are replayed under the protocol version in force,
    each adaptation record re-applies its transaction, and the recorded
    prior/new version hashes and prior assignment must match what the
    replay computes. Returns the final (marking, protocol, assignment).
    """
    protocol = copy.deepcopy(base_protocol)
    assignment = {role: set(members) for role, members in base_assignment.items()}
    marking = (
        frozenset(initial_marking)
        if initial_marking is not None
        else protocol.abstract.interaction.initial_marking()
    )
    segment: list[Event] = []
    expected_seq = 1

    def flush_segment() -> frozenset[str]:
        nonlocal segment
        if segment:
            result = replay_trace(protocol, assignment, segment, initial_marking=marking)
            segment = []
            return result
        return marking

    for entry in trace:
        seq = getattr(entry, "seq", None)
        if seq != expected_seq:
            raise ReplayDivergence(f"expected sequence {expected_seq}, got {seq}", seq or -1)
        expected_seq += 1
        if isinstance(entry, Event):
            segment.append(entry)
            continue
        if not isinstance(entry, AdaptationRecord):
            raise ReplayDivergence(f"unknown trace entry at {seq}", seq)
        marking = flush_segment()
        if protocol_version(protocol) != entry.prior_version:
            raise ReplayDivergence("prior protocol version hash diverges", entry.seq)
        recorded_prior = {role: set(members) for role, members in entry.prior_assignment.items()}
        if recorded_prior != assignment:
            raise ReplayDivergence("prior assignment diverges", entry.seq)
        try:
            protocol, assignment, new_marking = _apply_edits(
                protocol, assignment, marking, entry.transaction
            )
        except (TransactionInvalid, MigrationMissing) as exc:
            raise ReplayDivergence(f"recorded transaction no longer applies: {exc}", entry.seq)
        marking = frozenset(new_marking)
        if protocol_version(protocol) != entry.new_version:
            raise ReplayDivergence("new protocol version hash diverges", entry.seq)
    marking = flush_segment()
    return marking, protocol, assignment
