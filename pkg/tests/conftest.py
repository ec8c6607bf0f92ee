import numpy as np
import pytest
from hypothesis import settings

from approvaldap.core import Election

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")

# pass/fail lines appended by the acceptance suite; echoed in the terminal
# summary so they stay visible without -s
ACCEPTANCE_LINES: list[str] = []


def make_random_election(rng: np.random.Generator, max_m: int = 20, max_n: int = 20) -> Election:
    """Random election with a density drawn per election, edge shapes included."""
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    p = float(rng.uniform(0.05, 0.95))
    mat = (rng.random((n, m)) < p).astype(np.uint8)
    return Election(mat)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xA11CE)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
