import pytest

from phononblock.lindblad import SystemParams, thermal_occupancy

# One line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def params_at(delta, j, u, f, t=0.0):
    return SystemParams(delta, j, u, f, 1.0, thermal_occupancy(t))


@pytest.fixture
def fig5_params():
    return params_at(0.2885, 20.0, 0.00096, 0.01)


@pytest.fixture
def fig6_params():
    return params_at(0.288, 20.0, 0.00096, 0.01)
