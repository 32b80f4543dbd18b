import sys

import numpy as np
import pytest

from socialref.network import erdos_renyi_row_normalized


def random_instance(rng, n=None, alpha_max=0.8, p=None):
    """Random row-stochastic network and reference strengths in [0, alpha_max)."""
    n = int(rng.integers(4, 30)) if n is None else n
    p = rng.uniform(0.15, 0.6) if p is None else p
    net = erdos_renyi_row_normalized(n, p, seed=rng)
    alpha = rng.uniform(0.0, alpha_max, n)
    return net, alpha


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
