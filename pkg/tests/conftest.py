import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from interlock_quality.accuracy import step1_exact_merge, step2_topo_merge  # noqa: E402
from interlock_quality.graph import giant_component, project  # noqa: E402
from interlock_quality.synthetic import make_interlock_fixture  # noqa: E402

GOLDEN_SEED = 0


@pytest.fixture(scope="session")
def golden():
    return make_interlock_fixture(GOLDEN_SEED)


@pytest.fixture(scope="session")
def golden_stages(golden):
    """Giant component of the golden fixture and its two corrected versions."""
    g = giant_component(project(golden.table))
    g1, _ = step1_exact_merge(g)
    g2, _ = step2_topo_merge(g1)
    return {"original": g, "step1": g1, "step2": g2}


_acceptance_lines: list[str] = []


@pytest.fixture
def criterion(capsys):
    """``check(number, ok, detail)`` records a PASS/FAIL line, then asserts ``ok``."""

    def check(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _acceptance_lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
