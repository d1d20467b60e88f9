import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def random_instance(rng, n_max=8, d_max=4, n_min=2):
    """Random (N, D) with N in [n_min, n_max], D in [1, d_max]."""
    return int(rng.integers(n_min, n_max + 1)), int(rng.integers(1, d_max + 1))


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
