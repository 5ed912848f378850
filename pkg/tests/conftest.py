import numpy as np
import pytest

from forwardint import make_grid, sample_brownian

ACCEPTANCE_LINES: dict = {}


def record_criterion(key: str, ok: bool, detail: str):
    """Store one acceptance outcome; printed in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")

    def order(k):
        num = "".join(c for c in k if c.isdigit())
        return (int(num), k)

    for key in sorted(ACCEPTANCE_LINES, key=order):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def grid_small():
    return make_grid(1.0, 64, 64)


@pytest.fixture
def noise_small(grid_small):
    return sample_brownian(grid_small, 2, seed=7, stream_id=0)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
