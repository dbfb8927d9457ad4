import numpy as np
import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Append (criterion, passed, detail); lines are printed in the terminal summary."""
    return request.config.stash[ACCEPTANCE_KEY]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    grouped = {}
    for criterion, passed, detail in lines:
        grouped.setdefault(criterion, []).append((passed, detail))
    for criterion in sorted(grouped):
        parts = grouped[criterion]
        status = "PASS" if all(p for p, _ in parts) else "FAIL"
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {criterion:2d}: {status}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
