"""Canonical example content: the brainstorming protocol.

A five-phase pattern over two roles. The chairman opens with the
problem, participants contribute ideas (repeatable, so a self-loop),
the chairman classifies, participants comment (again a self-loop), and
the chairman closes with a summary. Used by the test suite, the demo
server, and the shipped interchange examples.
"""

from __future__ import annotations

from .environment import PERSON, SYSTEM, ImplementedResource, SocialEnvironment
from .implementation import (
    MESSAGE_POST,
    ActionDescriptor,
    ImplementedSocialProtocol,
    implement_protocol,
)
from .model import (
    ROLE,
    SYSTEM_CLASS,
    AbstractActivity,
    AbstractInteractionProtocol,
    AbstractResource,
    AbstractSocialNetwork,
    AbstractSocialProtocol,
    Edge,
    Relation,
    StateNode,
    compose_abstract_protocol,
)

CHAIRMAN = "chairman"
PARTICIPANT = "participant"
PUBLICATION_SYSTEM = "publication-system"

FORUM_URL = "https://forum.example/api"


def brainstorming_network() -> AbstractSocialNetwork:
    return AbstractSocialNetwork(
        resources=[
            AbstractResource(id=CHAIRMAN, kind=ROLE, label="Brainstorming chairman"),
            AbstractResource(id=PARTICIPANT, kind=ROLE, label="Brainstorming participant"),
            AbstractResource(id=PUBLICATION_SYSTEM, kind=SYSTEM_CLASS, label="Publication system"),
        ],
        relations=[
            Relation(source=PARTICIPANT, target=PUBLICATION_SYSTEM, label="uses"),
            Relation(source=CHAIRMAN, target=PUBLICATION_SYSTEM, label="uses"),
        ],
    )


def brainstorming_interaction() -> AbstractInteractionProtocol:
    return AbstractInteractionProtocol(
        states=[
            StateNode(id="problem-pending", label="Problem pending", is_initial=True),
            StateNode(id="waiting-for-ideas", label="Waiting for ideas"),
            StateNode(id="commenting", label="Commenting"),
            StateNode(id="closed", label="Closed", is_final=True),
        ],
        activities=[
            AbstractActivity(id="present-problem", label="Present the problem", role=CHAIRMAN),
            AbstractActivity(id="present-idea", label="Present an idea", role=PARTICIPANT),
            AbstractActivity(id="classify-ideas", label="Classify the ideas", role=CHAIRMAN),
            AbstractActivity(id="comment-idea", label="Comment an idea", role=PARTICIPANT),
            AbstractActivity(id="summarize", label="Summarize the session", role=CHAIRMAN),
        ],
        edges=[
            Edge("problem-pending", "present-problem"),
            Edge("present-problem", "waiting-for-ideas"),
            Edge("waiting-for-ideas", "present-idea"),
            Edge("present-idea", "waiting-for-ideas"),
            Edge("waiting-for-ideas", "classify-ideas"),
            Edge("classify-ideas", "commenting"),
            Edge("commenting", "comment-idea"),
            Edge("comment-idea", "commenting"),
            Edge("commenting", "summarize"),
            Edge("summarize", "closed"),
        ],
    )


def brainstorming_protocol() -> AbstractSocialProtocol:
    return compose_abstract_protocol(
        brainstorming_network(),
        brainstorming_interaction(),
        tags={"brainstorming", "collaboration-pattern"},
        protocol_id="brainstorming",
    )


def forum_post_action(form: str) -> ActionDescriptor:
    return ActionDescriptor(
        action_kind=MESSAGE_POST,
        target=f"{FORUM_URL}/{form}",
        parameters={"format": "markdown"},
    )


def brainstorming_environment() -> SocialEnvironment:
    """Team of four plus the forum the implementation posts to."""
    env = SocialEnvironment()
    for person in ("john", "ann", "bob", "cecil"):
        env.add_resource(ImplementedResource(id=person, kind=PERSON, label=person.capitalize()))
    env.add_resource(
        ImplementedResource(id="forum-1", kind=SYSTEM, label="Team forum", locator=FORUM_URL)
    )
    return env


def brainstorming_implementation(
    environment: SocialEnvironment, protocol: AbstractSocialProtocol | None = None
) -> ImplementedSocialProtocol:
    abstract = protocol or brainstorming_protocol()
    return implement_protocol(
        abstract,
        resource_map={PUBLICATION_SYSTEM: "forum-1"},
        activity_map={
            "present-problem": forum_post_action("problems"),
            "present-idea": forum_post_action("ideas"),
            "classify-ideas": forum_post_action("classification"),
            "comment-idea": forum_post_action("comments"),
            "summarize": forum_post_action("summary"),
        },
        environment=environment,
        new_resources=[
            ImplementedResource(id="forum-1", kind=SYSTEM, label="Team forum", locator=FORUM_URL)
        ],
        protocol_id="brainstorming-forum",
    )


BRAINSTORMING_ASSIGNMENT = {
    CHAIRMAN: {"john"},
    PARTICIPANT: {"ann", "bob", "cecil"},
}

GOLDEN_STEPS = [
    ("john", "present-problem"),
    ("ann", "present-idea"),
    ("bob", "present-idea"),
    ("john", "classify-ideas"),
    ("bob", "comment-idea"),
    ("john", "summarize"),
]


def substitute_search_environment() -> SocialEnvironment:
    """Four connected people plus john, who has no relations yet."""
    env = SocialEnvironment()
    for person in ("ann", "bob", "cecil", "dan", "john"):
        env.add_resource(ImplementedResource(id=person, kind=PERSON, label=person.capitalize()))
    env.add_relation("ann", "bob", "works_with")
    env.add_relation("bob", "cecil", "works_with")
    env.add_relation("ann", "dan", "manages")
    return env


def solo_review_protocol() -> AbstractSocialProtocol:
    """One-role net used where a process must assign a single person.

    The network still declares the participant role so substitute
    queries against this process can name it.
    """
    network = AbstractSocialNetwork(
        resources=[
            AbstractResource(id=CHAIRMAN, kind=ROLE, label="Chairman"),
            AbstractResource(id=PARTICIPANT, kind=ROLE, label="Participant"),
        ],
    )
    interaction = AbstractInteractionProtocol(
        states=[
            StateNode(id="open", label="Open", is_initial=True),
            StateNode(id="done", label="Done", is_final=True),
        ],
        activities=[AbstractActivity(id="review", label="Review", role=CHAIRMAN)],
        edges=[Edge("open", "review"), Edge("review", "done")],
    )
    return compose_abstract_protocol(
        network, interaction, tags={"review"}, protocol_id="solo-review"
    )
