from __future__ import annotations

import pytest

from socialproc import fixtures
from socialproc.engine import StepClock, instantiate

ACCEPTANCE_RESULTS: list[str] = []


def record_acceptance(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    ACCEPTANCE_RESULTS.append(f"[ACCEPTANCE] {name}: PASS{suffix}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def environment():
    return fixtures.brainstorming_environment()


@pytest.fixture
def abstract_protocol():
    return fixtures.brainstorming_protocol()


@pytest.fixture
def implemented_protocol(environment, abstract_protocol):
    return fixtures.brainstorming_implementation(environment, abstract_protocol)


@pytest.fixture
def process(implemented_protocol, environment):
    return instantiate(
        implemented_protocol,
        fixtures.BRAINSTORMING_ASSIGNMENT,
        environment,
        process_id="p1",
        clock=StepClock(),
    )


@pytest.fixture
def search_environment():
    return fixtures.substitute_search_environment()
