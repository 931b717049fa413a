from __future__ import annotations

import pytest

from conesafe.inference import StoppingRule, build_cone
from conesafe.model import bundled_model_path, load_model

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def gate():
    return load_model(bundled_model_path("gate.model"))


@pytest.fixture(scope="session")
def gate_faulty():
    return load_model(bundled_model_path("gate_faulty.model"))


@pytest.fixture(scope="session")
def gate_cone(gate):
    spec = gate.cruxes["FIRE"]
    return build_cone(gate.automaton, gate.crux_step("FIRE"), StoppingRule(3, spec.entry))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
