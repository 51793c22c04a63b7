from __future__ import annotations

import random

import pytest

from oracles import random_interaction
from socialproc import fixtures
from socialproc.errors import CrossReferenceError, ProtocolInvalid
from socialproc.model import (
    AbstractActivity,
    AbstractInteractionProtocol,
    AbstractResource,
    AbstractSocialNetwork,
    Edge,
    Relation,
    StateNode,
    compose_abstract_protocol,
    interaction_from_dict,
    network_from_dict,
    protocol_from_dict,
    validate_interaction_protocol,
    validate_social_network,
)


def test_brainstorming_net_is_valid():
    report = validate_interaction_protocol(fixtures.brainstorming_interaction())
    assert report.violations == []


def test_state_to_state_edge_flags_bipartite():
    net = fixtures.brainstorming_interaction()
    net.edges.append(Edge("problem-pending", "waiting-for-ideas"))
    report = validate_interaction_protocol(net)
    assert report.rules() == ["bipartite"]
    assert report.violations[0].element == "problem-pending->waiting-for-ideas"


def test_activity_to_activity_edge_flags_bipartite():
    net = fixtures.brainstorming_interaction()
    net.edges.append(Edge("present-problem", "summarize"))
    assert "bipartite" in validate_interaction_protocol(net).rules()


def test_activity_without_outgoing_edge_is_dangling():
    net = AbstractInteractionProtocol(
        states=[StateNode(id="start", is_initial=True)],
        activities=[AbstractActivity(id="act", label="", role="r")],
        edges=[Edge("start", "act")],
    )
    report = validate_interaction_protocol(net)
    assert report.rules() == ["activity-dangling"]
    assert report.violations[0].element == "act"


def test_activity_without_incoming_edge_is_dangling():
    net = AbstractInteractionProtocol(
        states=[StateNode(id="start", is_initial=True)],
        activities=[AbstractActivity(id="act", label="", role="r")],
        edges=[Edge("act", "start")],
    )
    assert validate_interaction_protocol(net).rules() == ["activity-dangling"]


def test_missing_initial_state_reported():
    net = fixtures.brainstorming_interaction()
    net.states = [
        StateNode(id=s.id, label=s.label, is_initial=False, is_final=s.is_final)
        for s in net.states
    ]
    assert "no-initial-state" in validate_interaction_protocol(net).rules()


def test_disconnected_component_reported():
    net = fixtures.brainstorming_interaction()
    net.states.append(StateNode(id="island"))
    report = validate_interaction_protocol(net)
    assert "disconnected" in report.rules()


def test_dangling_edge_reported_without_bipartite_noise():
    net = fixtures.brainstorming_interaction()
    net.edges.append(Edge("nowhere", "present-problem"))
    assert validate_interaction_protocol(net).rules() == ["dangling-edge"]


def test_duplicate_node_ids_reported():
    net = fixtures.brainstorming_interaction()
    net.activities.append(AbstractActivity(id="present-idea", label="", role="participant"))
    assert "duplicate-id" in validate_interaction_protocol(net).rules()


def test_validation_is_pure_and_deterministic():
    net = fixtures.brainstorming_interaction()
    net.edges.append(Edge("problem-pending", "waiting-for-ideas"))
    net.states.append(StateNode(id="island"))
    first = validate_interaction_protocol(net)
    second = validate_interaction_protocol(net)
    assert first == second


def test_report_ordering_by_rule_then_element():
    net = AbstractInteractionProtocol(
        states=[StateNode(id="z-state", is_initial=True), StateNode(id="a-state")],
        activities=[
            AbstractActivity(id="z-act", label="", role="r"),
            AbstractActivity(id="a-act", label="", role="r"),
        ],
        edges=[Edge("z-state", "z-act"), Edge("z-act", "z-state"), Edge("a-state", "a-act")],
    )
    report = validate_interaction_protocol(net)
    keys = [(v.rule, v.element) for v in report.violations]
    assert keys == sorted(keys)


def test_network_examples():
    network = fixtures.brainstorming_network()
    assert validate_social_network(network).violations == []

    network.relations.append(Relation("participant", "ghost", "uses"))
    report = validate_social_network(network)
    assert report.rules() == ["dangling-endpoint"]

    network = fixtures.brainstorming_network()
    network.relations.append(Relation("participant", "publication-system", "uses"))
    assert validate_social_network(network).rules() == ["duplicate-relation"]


def test_network_rejects_bad_kind_and_bad_id():
    network = AbstractSocialNetwork(
        resources=[
            AbstractResource(id="Bad Id", kind="role"),
            AbstractResource(id="ok", kind="wizard"),
        ]
    )
    assert validate_social_network(network).rules() == ["bad-kind", "invalid-id"]


def test_compose_checks_cross_references():
    protocol = compose_abstract_protocol(
        fixtures.brainstorming_network(),
        fixtures.brainstorming_interaction(),
        tags={"brainstorming"},
    )
    assert protocol.tags == {"brainstorming"}
    assert protocol.id


def test_compose_rejects_unknown_role():
    net = fixtures.brainstorming_interaction()
    net.activities.append(AbstractActivity(id="moderate", label="", role="moderator"))
    net.edges.extend([Edge("commenting", "moderate"), Edge("moderate", "commenting")])
    with pytest.raises(CrossReferenceError) as exc:
        compose_abstract_protocol(fixtures.brainstorming_network(), net)
    assert "moderate" in exc.value.ids


def test_compose_rejects_invalid_parts():
    net = fixtures.brainstorming_interaction()
    net.edges.append(Edge("problem-pending", "waiting-for-ideas"))
    with pytest.raises(ProtocolInvalid):
        compose_abstract_protocol(fixtures.brainstorming_network(), net)


def test_compose_with_empty_tags():
    protocol = compose_abstract_protocol(
        fixtures.brainstorming_network(), fixtures.brainstorming_interaction()
    )
    assert protocol.tags == set()


def test_accepted_nets_are_bipartite():
    # Independent re-check of the structural invariant on random accepted nets.
    rng = random.Random(7)
    for _ in range(25):
        net = random_interaction(rng)
        state_ids = {s.id for s in net.states}
        activity_ids = {a.id for a in net.activities}
        for edge in net.edges:
            assert (edge.source in state_ids) != (edge.target in state_ids)
            assert (edge.source in activity_ids) != (edge.target in activity_ids)


def test_round_trip_network_and_interaction():
    network = fixtures.brainstorming_network()
    assert network_from_dict(network.to_dict()).to_dict() == network.to_dict()
    interaction = fixtures.brainstorming_interaction()
    assert interaction_from_dict(interaction.to_dict()).to_dict() == interaction.to_dict()
    protocol = fixtures.brainstorming_protocol()
    assert protocol_from_dict(protocol.to_dict()).to_dict() == protocol.to_dict()
