"""Binding abstract protocols to concrete implementations.

Abstract resources map to environment resources; abstract activities
map to declarative action descriptors (what firing the activity does:
nothing the engine executes itself, a descriptor recorded in the trace
and optionally handed to an effect adapter). The engine stays
deterministic; delivery is an extension point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .canonical import content_hash
from .environment import ImplementedResource, SocialEnvironment
from .errors import IncompleteMapping, UnknownResource
from .model import AbstractSocialProtocol, fresh_id, protocol_from_dict
from .report import ValidationReport, Violation

MANUAL = "manual"
HTTP_CALL = "http-call"
MESSAGE_POST = "message-post"
ACTION_KINDS = (MANUAL, HTTP_CALL, MESSAGE_POST)


@dataclass(frozen=True)
class ActionDescriptor:
    action_kind: str
    target: str | None = None
    parameters: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "action_kind": self.action_kind,
            "target": self.target,
            "parameters": dict(sorted(self.parameters.items())),
        }


def manual_action(**parameters: str) -> ActionDescriptor:
    return ActionDescriptor(action_kind=MANUAL, parameters=parameters)


def descriptor_from_dict(doc: dict) -> ActionDescriptor:
    return ActionDescriptor(
        action_kind=doc["action_kind"],
        target=doc.get("target"),
        parameters=dict(doc.get("parameters", {})),
    )


@dataclass
class ImplementedSocialProtocol:
    id: str
    abstract: AbstractSocialProtocol
    resource_map: dict[str, str] = field(default_factory=dict)
    activity_map: dict[str, ActionDescriptor] = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Reference form: embeds the abstract protocol by id only."""
        return {
            "id": self.id,
            "abstract_protocol_id": self.abstract.id,
            "resource_map": dict(sorted(self.resource_map.items())),
            "activity_map": {
                aid: d.to_dict() for aid, d in sorted(self.activity_map.items())
            },
        }

    def to_full_dict(self) -> dict:
        """Self-contained form with the abstract protocol embedded.

        This is the canonical content for version hashing: run-time edits
        touch the embedded net, so the hash must cover it.
        """
        return {
            "id": self.id,
            "abstract": self.abstract.to_dict(),
            "resource_map": dict(sorted(self.resource_map.items())),
            "activity_map": {
                aid: d.to_dict() for aid, d in sorted(self.activity_map.items())
            },
        }


def protocol_version(protocol: ImplementedSocialProtocol) -> str:
    """Content-addressed version of the full protocol (net + mappings)."""
    return content_hash(protocol.to_full_dict())


def implemented_from_dict(doc: dict, abstract: AbstractSocialProtocol) -> ImplementedSocialProtocol:
    if doc.get("abstract_protocol_id") not in (None, abstract.id):
        raise UnknownResource(
            f"document references abstract protocol {doc['abstract_protocol_id']!r}, "
            f"got {abstract.id!r}",
            [doc["abstract_protocol_id"]],
        )
    return ImplementedSocialProtocol(
        id=doc["id"],
        abstract=abstract,
        resource_map=dict(doc.get("resource_map", {})),
        activity_map={
            aid: descriptor_from_dict(d) for aid, d in doc.get("activity_map", {}).items()
        },
    )


def implemented_from_full_dict(doc: dict) -> ImplementedSocialProtocol:
    return ImplementedSocialProtocol(
        id=doc["id"],
        abstract=protocol_from_dict(doc["abstract"]),
        resource_map=dict(doc.get("resource_map", {})),
        activity_map={
            aid: descriptor_from_dict(d) for aid, d in doc.get("activity_map", {}).items()
        },
    )


def _descriptor_violations(activity_id: str, descriptor: ActionDescriptor) -> list[Violation]:
    violations = []
    if descriptor.action_kind not in ACTION_KINDS:
        violations.append(
            Violation(
                "invalid-action",
                activity_id,
                f"action_kind must be one of {ACTION_KINDS}, got {descriptor.action_kind!r}",
            )
        )
    elif descriptor.action_kind == MANUAL:
        if descriptor.target:
            violations.append(
                Violation("invalid-action", activity_id, "manual actions take no target")
            )
    elif not descriptor.target:
        violations.append(
            Violation(
                "invalid-action",
                activity_id,
                f"{descriptor.action_kind} actions require a nonempty target",
            )
        )
    return violations


def completeness_report(
    abstract: AbstractSocialProtocol,
    resource_map: Mapping[str, str],
    activity_map: Mapping[str, ActionDescriptor],
) -> ValidationReport:
    """Pure totality check of the two mappings.

    Empty report iff implement_protocol would succeed against an
    environment that resolves every mapped resource.
    """
    violations: list[Violation] = []
    tools = {a.tool for a in abstract.interaction.activities if a.tool is not None}
    for tool in tools:
        if tool not in resource_map:
            violations.append(
                Violation("unmapped-tool", tool, "tool has no implemented resource mapping")
            )
    abstract_ids = {r.id for r in abstract.network.resources}
    for key in resource_map:
        if key not in abstract_ids:
            violations.append(
                Violation(
                    "unknown-abstract-resource", key, "mapped key is not an abstract resource"
                )
            )
    activity_ids = abstract.interaction.activity_ids()
    for aid in sorted(activity_ids):
        if aid not in activity_map:
            violations.append(
                Violation("unmapped-activity", aid, "activity has no action descriptor")
            )
    for aid, descriptor in activity_map.items():
        if aid not in activity_ids:
            violations.append(
                Violation("unknown-activity", aid, "mapped key is not a protocol activity")
            )
        violations.extend(_descriptor_violations(aid, descriptor))
    return ValidationReport.build(violations)


def implement_protocol(
    abstract: AbstractSocialProtocol,
    resource_map: Mapping[str, str],
    activity_map: Mapping[str, ActionDescriptor],
    environment: SocialEnvironment,
    new_resources: Iterable[ImplementedResource] = (),
    protocol_id: str | None = None,
) -> ImplementedSocialProtocol:
    """Bind an abstract protocol to concrete resources and actions.

    Newly introduced implemented resources are registered into the
    environment first (the environment grows as a side effect of
    implementation); mapped targets must then all resolve. Re-running
    with identical inputs leaves the environment unchanged.
    """
    report = completeness_report(abstract, resource_map, activity_map)
    if not report.ok:
        raise IncompleteMapping(
            "resource/activity mappings are incomplete",
            report,
            ids=[v.element for v in report.errors()],
        )
    for resource in new_resources:
        environment.ensure_resource(resource)
    missing = sorted(
        {target for target in resource_map.values() if not environment.has_resource(target)}
    )
    if missing:
        raise UnknownResource(
            f"mapped resources absent from environment: {', '.join(missing)}", missing
        )
    return ImplementedSocialProtocol(
        id=protocol_id or fresh_id("impl"),
        abstract=abstract,
        resource_map=dict(resource_map),
        activity_map=dict(activity_map),
    )
