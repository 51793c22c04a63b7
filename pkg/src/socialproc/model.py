"""Abstract social protocols: the design-time layer.

A protocol couples two directed graphs. The social network relates
abstract resources (collaboration roles, classes of information
systems) with free-form labeled edges. The interaction net is a
bipartite graph of group states and role-bound activities; edges run
only between a state and an activity, which gives the net its firing
semantics (states hold the marking, activities move it).

Validators here are pure and total: they accept arbitrary candidate
graphs and return a report of violations rather than raising.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass, field

from .errors import CrossReferenceError, ProtocolInvalid
from .report import ValidationReport, Violation

ROLE = "role"
SYSTEM_CLASS = "system-class"
RESOURCE_KINDS = (ROLE, SYSTEM_CLASS)

_ID_RE = re.compile(r"^[a-z0-9_-]+$")


def is_valid_id(value: object) -> bool:
    return isinstance(value, str) and bool(_ID_RE.match(value))


def fresh_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:8]}"


@dataclass(frozen=True)
class AbstractResource:
    id: str
    kind: str
    label: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "label": self.label}


@dataclass(frozen=True)
class Relation:
    """Directed labeled edge; also used for concrete environment graphs."""

    source: str
    target: str
    label: str

    def to_dict(self) -> dict:
        return {"source": self.source, "target": self.target, "label": self.label}

    @property
    def key(self) -> str:
        return f"{self.source}-[{self.label}]->{self.target}"


@dataclass
class AbstractSocialNetwork:
    resources: list[AbstractResource] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)

    def resource(self, resource_id: str) -> AbstractResource | None:
        for r in self.resources:
            if r.id == resource_id:
                return r
        return None

    def role_ids(self) -> set[str]:
        return {r.id for r in self.resources if r.kind == ROLE}

    def system_class_ids(self) -> set[str]:
        return {r.id for r in self.resources if r.kind == SYSTEM_CLASS}

    def to_dict(self) -> dict:
        return {
            "resources": [r.to_dict() for r in sorted(self.resources, key=lambda r: r.id)],
            "relations": [r.to_dict() for r in sorted(self.relations, key=lambda r: r.key)],
        }


@dataclass(frozen=True)
class StateNode:
    id: str
    label: str = ""
    is_initial: bool = False
    is_final: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "is_initial": self.is_initial,
            "is_final": self.is_final,
        }


@dataclass(frozen=True)
class AbstractActivity:
    id: str
    label: str
    role: str
    tool: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "label": self.label, "role": self.role, "tool": self.tool}


@dataclass(frozen=True)
class Edge:
    source: str
    target: str

    def to_dict(self) -> dict:
        return {"from": self.source, "to": self.target}

    @property
    def key(self) -> str:
        return f"{self.source}->{self.target}"


@dataclass
class AbstractInteractionProtocol:
    states: list[StateNode] = field(default_factory=list)
    activities: list[AbstractActivity] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def state_ids(self) -> set[str]:
        return {s.id for s in self.states}

    def activity_ids(self) -> set[str]:
        return {a.id for a in self.activities}

    def state(self, state_id: str) -> StateNode | None:
        for s in self.states:
            if s.id == state_id:
                return s
        return None

    def activity(self, activity_id: str) -> AbstractActivity | None:
        for a in self.activities:
            if a.id == activity_id:
                return a
        return None

    def inputs_of(self, activity_id: str) -> frozenset[str]:
        """State ids with an edge into the activity."""
        states = self.state_ids()
        return frozenset(
            e.source for e in self.edges if e.target == activity_id and e.source in states
        )

    def outputs_of(self, activity_id: str) -> frozenset[str]:
        """State ids the activity has an edge into."""
        states = self.state_ids()
        return frozenset(
            e.target for e in self.edges if e.source == activity_id and e.target in states
        )

    def initial_marking(self) -> frozenset[str]:
        return frozenset(s.id for s in self.states if s.is_initial)

    def final_state_ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.states if s.is_final)

    def to_dict(self) -> dict:
        return {
            "states": [s.to_dict() for s in sorted(self.states, key=lambda s: s.id)],
            "activities": [a.to_dict() for a in sorted(self.activities, key=lambda a: a.id)],
            "edges": [e.to_dict() for e in sorted(self.edges, key=lambda e: e.key)],
        }


@dataclass
class AbstractSocialProtocol:
    id: str
    network: AbstractSocialNetwork
    interaction: AbstractInteractionProtocol
    tags: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "network": self.network.to_dict(),
            "interaction": self.interaction.to_dict(),
            "tags": sorted(self.tags),
        }


# ---------------------------------------------------------------------------
# Validation


def validate_social_network(network: AbstractSocialNetwork) -> ValidationReport:
    """Check the social-network invariants; empty report means valid."""
    violations: list[Violation] = []
    seen: set[str] = set()
    for r in network.resources:
        if r.id in seen:
            violations.append(
                Violation("duplicate-id", r.id, f"resource id {r.id!r} declared more than once")
            )
        seen.add(r.id)
        if not is_valid_id(r.id):
            violations.append(
                Violation("invalid-id", str(r.id), "resource id must match [a-z0-9_-]+")
            )
        if r.kind not in RESOURCE_KINDS:
            violations.append(
                Violation("bad-kind", r.id, f"kind must be one of {RESOURCE_KINDS}, got {r.kind!r}")
            )
    seen_triples: set[tuple[str, str, str]] = set()
    for rel in network.relations:
        for endpoint in (rel.source, rel.target):
            if endpoint not in seen:
                violations.append(
                    Violation(
                        "dangling-endpoint",
                        rel.key,
                        f"relation endpoint {endpoint!r} is not a declared resource",
                    )
                )
        if not rel.label:
            violations.append(Violation("empty-label", rel.key, "relation labels must be nonempty"))
        triple = (rel.source, rel.target, rel.label)
        if triple in seen_triples:
            violations.append(
                Violation("duplicate-relation", rel.key, "identical relation triple repeated")
            )
        seen_triples.add(triple)
    return ValidationReport.build(violations)


def validate_interaction_protocol(interaction: AbstractInteractionProtocol) -> ValidationReport:
    """Check the interaction-net invariants; empty report means valid.

    Rules: unique well-formed node ids, edges bipartite between known
    states and activities, no duplicate edges, every activity wired to
    at least one input state and one output state, at least one initial
    state, and a connected underlying undirected graph.
    """
    violations: list[Violation] = []
    state_ids: set[str] = set()
    activity_ids: set[str] = set()
    for s in interaction.states:
        if s.id in state_ids:
            violations.append(
                Violation("duplicate-id", s.id, f"state id {s.id!r} declared more than once")
            )
        state_ids.add(s.id)
        if not is_valid_id(s.id):
            violations.append(Violation("invalid-id", str(s.id), "state id must match [a-z0-9_-]+"))
    for a in interaction.activities:
        if a.id in activity_ids or a.id in state_ids:
            violations.append(
                Violation("duplicate-id", a.id, f"node id {a.id!r} declared more than once")
            )
        activity_ids.add(a.id)
        if not is_valid_id(a.id):
            violations.append(
                Violation("invalid-id", str(a.id), "activity id must match [a-z0-9_-]+")
            )

    known = state_ids | activity_ids
    seen_edges: set[tuple[str, str]] = set()
    for e in interaction.edges:
        if e.source not in known or e.target not in known:
            violations.append(
                Violation("dangling-edge", e.key, "edge endpoint is not a declared node")
            )
            continue
        if (e.source, e.target) in seen_edges:
            violations.append(Violation("duplicate-edge", e.key, "edge repeated"))
        seen_edges.add((e.source, e.target))
        source_is_state = e.source in state_ids
        target_is_state = e.target in state_ids
        if source_is_state == target_is_state:
            side = "states" if source_is_state else "activities"
            violations.append(
                Violation(
                    "bipartite",
                    e.key,
                    f"edges must connect a state and an activity, never two {side}",
                )
            )

    for a in interaction.activities:
        if not interaction.inputs_of(a.id):
            violations.append(
                Violation(
                    "activity-dangling", a.id, "activity has no incoming edge from any state"
                )
            )
        if not interaction.outputs_of(a.id):
            violations.append(
                Violation("activity-dangling", a.id, "activity has no outgoing edge to any state")
            )

    if not any(s.is_initial for s in interaction.states):
        violations.append(Violation("no-initial-state", "", "no state is marked is_initial"))

    violations.extend(_connectivity_violations(interaction, known))
    return ValidationReport.build(violations)


def _connectivity_violations(
    interaction: AbstractInteractionProtocol, known: set[str]
) -> list[Violation]:
    if not known:
        return []
    neighbors: dict[str, set[str]] = {n: set() for n in known}
    for e in interaction.edges:
        if e.source in known and e.target in known:
            neighbors[e.source].add(e.target)
            neighbors[e.target].add(e.source)
    components: list[list[str]] = []
    unvisited = set(known)
    while unvisited:
        root = min(unvisited)
        component = {root}
        frontier = [root]
        while frontier:
            node = frontier.pop()
            for nxt in neighbors[node]:
                if nxt not in component:
                    component.add(nxt)
                    frontier.append(nxt)
        unvisited -= component
        components.append(sorted(component))
    components.sort(key=lambda c: c[0])
    return [
        Violation(
            "disconnected",
            comp[0],
            f"nodes {{{', '.join(comp)}}} are not connected to the rest of the net",
        )
        for comp in components[1:]
    ]


def cross_reference_report(
    network: AbstractSocialNetwork, interaction: AbstractInteractionProtocol
) -> ValidationReport:
    """Check that every activity role/tool resolves in the network."""
    roles = network.role_ids()
    systems = network.system_class_ids()
    violations = []
    for a in interaction.activities:
        if a.role not in roles:
            violations.append(
                Violation(
                    "unknown-role", a.id, f"activity role {a.role!r} is not a role in the network"
                )
            )
        if a.tool is not None and a.tool not in systems:
            violations.append(
                Violation(
                    "unknown-tool",
                    a.id,
                    f"activity tool {a.tool!r} is not a system class in the network",
                )
            )
    return ValidationReport.build(violations)


def validate_abstract_protocol(protocol: AbstractSocialProtocol) -> ValidationReport:
    report = validate_social_network(protocol.network)
    report = report.merged(validate_interaction_protocol(protocol.interaction))
    return report.merged(cross_reference_report(protocol.network, protocol.interaction))


def compose_abstract_protocol(
    network: AbstractSocialNetwork,
    interaction: AbstractInteractionProtocol,
    tags: set[str] | list[str] | tuple[str, ...] = (),
    protocol_id: str | None = None,
) -> AbstractSocialProtocol:
    """Assemble a protocol from its two parts.

    Succeeds iff both parts validate on their own and every activity
    role/tool resolves in the network. Raises instead of reporting
    because composition is a constructor, not a lint pass.
    """
    part_report = validate_social_network(network).merged(
        validate_interaction_protocol(interaction)
    )
    if not part_report.ok:
        raise ProtocolInvalid("protocol parts failed validation", part_report)
    xref = cross_reference_report(network, interaction)
    if not xref.ok:
        raise CrossReferenceError(
            "activity references unresolvable in network",
            xref,
            ids=[v.element for v in xref.errors()],
        )
    return AbstractSocialProtocol(
        id=protocol_id or fresh_id("sp"),
        network=network,
        interaction=interaction,
        tags=set(tags),
    )


# ---------------------------------------------------------------------------
# Interchange


def network_from_dict(doc: dict) -> AbstractSocialNetwork:
    return AbstractSocialNetwork(
        resources=[
            AbstractResource(id=r["id"], kind=r["kind"], label=r.get("label", ""))
            for r in doc.get("resources", [])
        ],
        relations=[
            Relation(source=r["source"], target=r["target"], label=r["label"])
            for r in doc.get("relations", [])
        ],
    )


def interaction_from_dict(doc: dict) -> AbstractInteractionProtocol:
    return AbstractInteractionProtocol(
        states=[
            StateNode(
                id=s["id"],
                label=s.get("label", ""),
                is_initial=bool(s.get("is_initial", False)),
                is_final=bool(s.get("is_final", False)),
            )
            for s in doc.get("states", [])
        ],
        activities=[
            AbstractActivity(
                id=a["id"], label=a.get("label", ""), role=a["role"], tool=a.get("tool")
            )
            for a in doc.get("activities", [])
        ],
        edges=[Edge(source=e["from"], target=e["to"]) for e in doc.get("edges", [])],
    )


def protocol_from_dict(doc: dict) -> AbstractSocialProtocol:
    return AbstractSocialProtocol(
        id=doc["id"],
        network=network_from_dict(doc["network"]),
        interaction=interaction_from_dict(doc["interaction"]),
        tags=set(doc.get("tags", [])),
    )
