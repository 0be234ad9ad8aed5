from __future__ import annotations

import numpy as np
import pytest

from rhythmctl.control import ControllerConfig, NodeMapping
from rhythmctl.model import ClosedLoopState, NetworkConfig

# Filled by tests/test_acceptance.py; printed once at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_closed_loop(rng, n=3, m=None, filtered=False):
    """Small random closed-loop instance with a nonzero state."""
    m = n if m is None else m
    plant = NetworkConfig(rng.uniform(-1, 1, (n, n)), 0.52, 0.5, 0.01)
    ref = NetworkConfig(rng.uniform(-1, 1, (m, m)), 0.52, 0.5, 0.01)
    ctrl = ControllerConfig(alpha_c=0.02, alpha_r=0.52, gamma=2.08, k=tuple(rng.uniform(50, 150, n)),
                            delta=1e-3, k_hat=0.5 if filtered else None)
    mapping = NodeMapping.identity(n) if m == n else NodeMapping(tuple(int(v) for v in rng.integers(0, m, n)))
    state = ClosedLoopState(
        x=rng.uniform(-1, 1, n), y=rng.uniform(-1, 1, n), xc=rng.uniform(0.2, 1), yc=rng.uniform(-1, 1),
        a=rng.uniform(0, 1, n), X=rng.uniform(-1, 1, m), Y=rng.uniform(-1, 1, m),
        a_hat=rng.uniform(0, 1, n) if filtered else None,
    )
    return plant, ref, ctrl, mapping, state
