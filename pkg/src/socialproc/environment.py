"""The social environment: a persistent labeled directed graph of
concrete people and information systems.

It backs three things: resolving mapped resources when a protocol is
implemented, checking collaborators when a process is instantiated, and
substitute discovery when a member becomes unavailable. Traversal for
discovery ignores edge direction and labels; social proximity is plain
BFS distance.

Single-writer discipline: mutations take the internal lock, queries
copy the graph under the lock and compute outside it.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

from .errors import DuplicateId, NotFound, ResourceInUse, UnknownResource, UnknownRole
from .model import Relation, is_valid_id
from .report import ValidationReport, Violation

if TYPE_CHECKING:
    from .engine import SocialProcess

logger = logging.getLogger(__name__)

PERSON = "person"
SYSTEM = "system"
IMPLEMENTED_KINDS = (PERSON, SYSTEM)

COLLABORATION_LABEL_PREFIX = "collaborates-in:"


@dataclass(frozen=True)
class ImplementedResource:
    id: str
    kind: str
    label: str = ""
    locator: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "label": self.label, "locator": self.locator}


@dataclass(frozen=True)
class SubstituteHit:
    """One discovery result: a person reachable from the unavailable member."""

    person: str
    distance: int
    path: tuple[str, ...]
    labels: tuple[str, ...]


def validate_resource(resource: ImplementedResource) -> ValidationReport:
    violations = []
    if not is_valid_id(resource.id):
        violations.append(
            Violation("invalid-id", str(resource.id), "resource id must match [a-z0-9_-]+")
        )
    if resource.kind not in IMPLEMENTED_KINDS:
        violations.append(
            Violation(
                "bad-kind",
                resource.id,
                f"kind must be one of {IMPLEMENTED_KINDS}, got {resource.kind!r}",
            )
        )
    elif resource.kind == SYSTEM and not resource.locator:
        violations.append(
            Violation("locator", resource.id, "system resources require a locator URI")
        )
    elif resource.kind == PERSON and resource.locator is not None:
        violations.append(
            Violation("locator", resource.id, "person resources must not carry a locator")
        )
    return ValidationReport.build(violations)


@dataclass
class SocialEnvironment:
    _resources: dict[str, ImplementedResource] = field(default_factory=dict)
    _relations: set[Relation] = field(default_factory=set)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False, compare=False)

    # -- mutation ----------------------------------------------------------

    def add_resource(self, resource: ImplementedResource) -> None:
        from .errors import ValidationFailed

        report = validate_resource(resource)
        if not report.ok:
            raise ValidationFailed(f"resource {resource.id!r} is malformed", report)
        with self._lock:
            if resource.id in self._resources:
                raise DuplicateId(f"resource id {resource.id!r} already present", [resource.id])
            self._resources[resource.id] = resource

    def ensure_resource(self, resource: ImplementedResource) -> bool:
        """Add if absent; no-op when an identical resource already exists.

        Returns True when the resource was newly added. A clashing id with
        different content raises DuplicateId, keeping re-registration
        idempotent without masking conflicts.
        """
        with self._lock:
            existing = self._resources.get(resource.id)
            if existing is None:
                self.add_resource(resource)
                return True
            if existing != resource:
                raise DuplicateId(
                    f"resource id {resource.id!r} already present with different content",
                    [resource.id],
                )
            return False

    def add_relation(self, source: str, target: str, label: str) -> bool:
        """Add a directed labeled relation; duplicates are silently ignored.

        Returns True when the triple was new.
        """
        if not label:
            raise ValueError("relation labels must be nonempty")
        with self._lock:
            for endpoint in (source, target):
                if endpoint not in self._resources:
                    raise UnknownResource(f"unknown resource {endpoint!r}", [endpoint])
            rel = Relation(source=source, target=target, label=label)
            if rel in self._relations:
                return False
            self._relations.add(rel)
            return True

    def remove_resource(self, resource_id: str, live_processes: Iterable["SocialProcess"] = ()) -> None:
        """Delete a resource and its incident relations.

        Refused while any live process references the resource, either as
        an assigned collaborator or as a mapped implementation target.
        """
        with self._lock:
            if resource_id not in self._resources:
                raise NotFound(f"unknown resource {resource_id!r}", [resource_id])
            holders = [p.id for p in live_processes if _process_references(p, resource_id)]
            if holders:
                raise ResourceInUse(
                    f"resource {resource_id!r} is referenced by live processes", holders
                )
            del self._resources[resource_id]
            self._relations = {
                r for r in self._relations if resource_id not in (r.source, r.target)
            }

    def enrich_from_process(self, process: "SocialProcess") -> int:
        """Record that the process's collaborators now collaborate.

        For every unordered pair of distinct assigned collaborators, both
        directed relations labeled ``collaborates-in:<process id>`` are
        ensured. Idempotent; returns the number of relations added.
        """
        members = sorted({m for group in process.assignment.values() for m in group})
        label = COLLABORATION_LABEL_PREFIX + process.id
        added = 0
        with self._lock:
            known = [m for m in members if m in self._resources]
            for i, a in enumerate(known):
                for b in known[i + 1 :]:
                    for src, dst in ((a, b), (b, a)):
                        rel = Relation(source=src, target=dst, label=label)
                        if rel not in self._relations:
                            self._relations.add(rel)
                            added += 1
        return added

    # -- queries -----------------------------------------------------------

    def has_resource(self, resource_id: str) -> bool:
        with self._lock:
            return resource_id in self._resources

    def resource(self, resource_id: str) -> ImplementedResource:
        with self._lock:
            if resource_id not in self._resources:
                raise NotFound(f"unknown resource {resource_id!r}", [resource_id])
            return self._resources[resource_id]

    def resources(self) -> list[ImplementedResource]:
        with self._lock:
            return sorted(self._resources.values(), key=lambda r: r.id)

    def relations(self) -> list[Relation]:
        with self._lock:
            return sorted(self._relations, key=lambda r: r.key)

    def persons(self) -> list[ImplementedResource]:
        return [r for r in self.resources() if r.kind == PERSON]

    def is_person(self, resource_id: str) -> bool:
        with self._lock:
            r = self._resources.get(resource_id)
            return r is not None and r.kind == PERSON

    def find_substitutes(
        self,
        unavailable: str,
        max_depth: int,
        role: str | None = None,
        process: "SocialProcess | None" = None,
        verbose: bool = False,
    ) -> list[tuple[str, int]] | list[SubstituteHit]:
        """Rank replacement candidates for an unavailable member.

        Breadth-first search from ``unavailable`` over relations in either
        direction, any label. Returns persons at distance 1..max_depth,
        excluding the unavailable member and anyone already assigned to a
        role in ``process``, ordered by ascending distance then id.

        ``role`` is bookkeeping only (it names the role being backfilled);
        it must resolve in the process's network when both are given.
        """
        if max_depth < 1:
            raise ValueError("max_depth must be a positive integer")
        with self._lock:
            if unavailable not in self._resources:
                raise UnknownResource(f"unknown resource {unavailable!r}", [unavailable])
            kinds = {rid: r.kind for rid, r in self._resources.items()}
            neighbors: dict[str, dict[str, str]] = {rid: {} for rid in self._resources}
            for rel in sorted(self._relations, key=lambda r: r.key):
                # Undirected traversal; remember the smallest label per pair.
                for a, b in ((rel.source, rel.target), (rel.target, rel.source)):
                    if b not in neighbors[a]:
                        neighbors[a][b] = rel.label

        if role is not None and process is not None:
            if role not in process.protocol.abstract.network.role_ids():
                raise UnknownRole(f"role {role!r} not part of the process protocol", [role])
        assigned: set[str] = set()
        if process is not None:
            for group in process.assignment.values():
                assigned |= set(group)
        logger.debug(
            "substitute search: unavailable=%s role=%s process=%s depth=%d",
            unavailable,
            role,
            process.id if process else None,
            max_depth,
        )

        distance = {unavailable: 0}
        parent: dict[str, tuple[str, str]] = {}
        queue = deque([unavailable])
        while queue:
            node = queue.popleft()
            if distance[node] >= max_depth:
                continue
            for nxt in sorted(neighbors.get(node, {})):
                if nxt not in distance:
                    distance[nxt] = distance[node] + 1
                    parent[nxt] = (node, neighbors[node][nxt])
                    queue.append(nxt)

        hits: list[SubstituteHit] = []
        for node, dist in distance.items():
            if node == unavailable or dist < 1:
                continue
            if kinds.get(node) != PERSON or node in assigned:
                continue
            path = [node]
            labels: list[str] = []
            cur = node
            while cur != unavailable:
                prev, label = parent[cur]
                labels.append(label)
                path.append(prev)
                cur = prev
            hits.append(
                SubstituteHit(
                    person=node,
                    distance=dist,
                    path=tuple(reversed(path)),
                    labels=tuple(reversed(labels)),
                )
            )
        hits.sort(key=lambda h: (h.distance, h.person))
        if verbose:
            return hits
        return [(h.person, h.distance) for h in hits]

    # -- interchange ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "resources": [r.to_dict() for r in self.resources()],
            "relations": [r.to_dict() for r in self.relations()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SocialEnvironment":
        env = cls()
        for r in doc.get("resources", []):
            env.add_resource(
                ImplementedResource(
                    id=r["id"], kind=r["kind"], label=r.get("label", ""), locator=r.get("locator")
                )
            )
        for rel in doc.get("relations", []):
            env.add_relation(rel["source"], rel["target"], rel["label"])
        return env


def validate_environment_doc(doc: dict) -> ValidationReport:
    """Report-style validation of an environment interchange document."""
    violations = []
    seen: set[str] = set()
    for r in doc.get("resources", []):
        rid = r.get("id", "")
        if rid in seen:
            violations.append(Violation("duplicate-id", rid, "resource id repeated"))
        seen.add(rid)
        res = ImplementedResource(
            id=rid, kind=r.get("kind", ""), label=r.get("label", ""), locator=r.get("locator")
        )
        violations.extend(validate_resource(res).violations)
    seen_triples = set()
    for rel in doc.get("relations", []):
        key = f"{rel.get('source')}-[{rel.get('label')}]->{rel.get('target')}"
        for endpoint in (rel.get("source"), rel.get("target")):
            if endpoint not in seen:
                violations.append(
                    Violation("dangling-endpoint", key, f"unknown endpoint {endpoint!r}")
                )
        if not rel.get("label"):
            violations.append(Violation("empty-label", key, "relation labels must be nonempty"))
        triple = (rel.get("source"), rel.get("target"), rel.get("label"))
        if triple in seen_triples:
            violations.append(Violation("duplicate-relation", key, "relation triple repeated"))
        seen_triples.add(triple)
    return ValidationReport.build(violations)


def _process_references(process: "SocialProcess", resource_id: str) -> bool:
    if any(resource_id in group for group in process.assignment.values()):
        return True
    return resource_id in process.protocol.resource_map.values()
