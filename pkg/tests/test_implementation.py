from __future__ import annotations

import pytest

from socialproc import fixtures
from socialproc.environment import SYSTEM, ImplementedResource
from socialproc.errors import DuplicateId, IncompleteMapping, UnknownResource
from socialproc.implementation import (
    MANUAL,
    MESSAGE_POST,
    ActionDescriptor,
    completeness_report,
    descriptor_from_dict,
    implement_protocol,
    implemented_from_dict,
    implemented_from_full_dict,
    manual_action,
    protocol_version,
)
from socialproc.model import AbstractActivity, Edge


def full_activity_map():
    return {
        aid: fixtures.forum_post_action(aid)
        for aid in ("present-problem", "present-idea", "classify-ideas", "comment-idea", "summarize")
    }


def test_implement_brainstorming(environment, abstract_protocol):
    implemented = implement_protocol(
        abstract_protocol,
        resource_map={"publication-system": "forum-1"},
        activity_map=full_activity_map(),
        environment=environment,
    )
    assert implemented.abstract is abstract_protocol
    assert implemented.activity_map["present-idea"].action_kind == MESSAGE_POST
    assert completeness_report(
        abstract_protocol, implemented.resource_map, implemented.activity_map
    ).ok


def test_missing_activity_mapping_rejected(environment, abstract_protocol):
    maps = full_activity_map()
    del maps["summarize"]
    with pytest.raises(IncompleteMapping) as exc:
        implement_protocol(abstract_protocol, {}, maps, environment)
    assert exc.value.ids == ["summarize"]


def test_all_manual_with_empty_resource_map(environment, abstract_protocol):
    # No activity references a tool, so vacuous resource coverage is fine.
    implemented = implement_protocol(
        abstract_protocol,
        {},
        {aid: manual_action() for aid in abstract_protocol.interaction.activity_ids()},
        environment,
    )
    assert implemented.resource_map == {}


def test_empty_maps_report_five_unmapped_activities(abstract_protocol):
    report = completeness_report(abstract_protocol, {}, {})
    assert report.rules() == ["unmapped-activity"] * 5


def test_unmapped_tool_reported(abstract_protocol):
    abstract_protocol.interaction.activities = [
        AbstractActivity(id=a.id, label=a.label, role=a.role, tool="publication-system")
        if a.id == "present-idea"
        else a
        for a in abstract_protocol.interaction.activities
    ]
    report = completeness_report(abstract_protocol, {}, full_activity_map())
    assert report.rules() == ["unmapped-tool"]
    assert report.violations[0].element == "publication-system"


def test_descriptor_invariants_reported(abstract_protocol):
    maps = full_activity_map()
    maps["summarize"] = ActionDescriptor(action_kind=MANUAL, target="https://nope")
    maps["present-idea"] = ActionDescriptor(action_kind=MESSAGE_POST, target=None)
    report = completeness_report(abstract_protocol, {}, maps)
    assert report.rules() == ["invalid-action", "invalid-action"]


def test_unknown_mapped_resource_rejected(environment, abstract_protocol):
    with pytest.raises(UnknownResource) as exc:
        implement_protocol(
            abstract_protocol,
            {"publication-system": "ghost-system"},
            full_activity_map(),
            environment,
        )
    assert exc.value.ids == ["ghost-system"]


def test_new_resources_registered_and_idempotent(environment, abstract_protocol):
    wiki = ImplementedResource(id="wiki-1", kind=SYSTEM, label="Wiki", locator="https://wiki")
    before = {r.id for r in environment.resources()}
    relations_before = environment.relations()
    for _ in range(2):
        implement_protocol(
            abstract_protocol,
            {"publication-system": "wiki-1"},
            full_activity_map(),
            environment,
            new_resources=[wiki],
        )
    after = {r.id for r in environment.resources()}
    assert after - before == {"wiki-1"}
    # Enrichment is additive: nothing pre-existing was dropped or altered.
    assert before <= after
    assert environment.relations() == relations_before


def test_new_resource_conflicting_content_rejected(environment, abstract_protocol):
    clash = ImplementedResource(id="forum-1", kind=SYSTEM, label="Other", locator="https://other")
    with pytest.raises(DuplicateId):
        implement_protocol(
            abstract_protocol,
            {"publication-system": "forum-1"},
            full_activity_map(),
            environment,
            new_resources=[clash],
        )


def test_implemented_protocol_never_incomplete(environment, abstract_protocol):
    implemented = implement_protocol(
        abstract_protocol, {"publication-system": "forum-1"}, full_activity_map(), environment
    )
    assert completeness_report(
        implemented.abstract, implemented.resource_map, implemented.activity_map
    ).ok


def test_interchange_round_trips(implemented_protocol):
    doc = implemented_protocol.to_dict()
    rebuilt = implemented_from_dict(doc, implemented_protocol.abstract)
    assert rebuilt.to_dict() == doc
    full = implemented_protocol.to_full_dict()
    assert implemented_from_full_dict(full).to_full_dict() == full
    descriptor = fixtures.forum_post_action("ideas")
    assert descriptor_from_dict(descriptor.to_dict()) == descriptor


def test_protocol_version_tracks_content(implemented_protocol):
    v1 = protocol_version(implemented_protocol)
    assert v1 == protocol_version(implemented_protocol)
    implemented_protocol.abstract.interaction.edges.append(Edge("closed", "present-problem"))
    assert protocol_version(implemented_protocol) != v1
