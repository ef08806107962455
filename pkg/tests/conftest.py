import numpy as np
import pytest

from neuro_irl.gridworld import GridSpec, MdpKind, build_gridworld


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def goal_world_4():
    # single goal in the bottom-right corner
    return build_gridworld(GridSpec(n=4, goals=((15, 10.0),)))


@pytest.fixture
def linear_goal_world_4():
    return build_gridworld(GridSpec(n=4, d=0.7, mdp_kind=MdpKind.LINEAR, goals=((5, 100.0),)))


# -- acceptance report -----------------------------------------------------------

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion."""

    def record(criterion: int, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
