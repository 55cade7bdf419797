from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from wiretapnet import data_path
from wiretapnet.netmodel import load_network

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def four_node():
    return load_network(data_path("four_node.json"))


@pytest.fixture
def four_node_pipes():
    return load_network(data_path("four_node_pipes.json"))


@pytest.fixture
def three_edge():
    return load_network(data_path("three_edge.json"))


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
