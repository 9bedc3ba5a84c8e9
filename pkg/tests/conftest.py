from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pmfspace.joint import joint_from_table
from pmfspace.pmf import normalize

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

P1_TABLE = np.array([[3, 6, 1], [6, 1, 3], [1, 3, 6]]) / 30
P2_TABLE = np.array([[12, 30, 1], [10, 6, 48], [12, 8, 30]]) / 157


@pytest.fixture
def p1():
    return joint_from_table(3, P1_TABLE)


@pytest.fixture
def p2():
    return joint_from_table(3, P2_TABLE)


@pytest.fixture
def urn():
    """Single-draw posteriors of the three-urn example, keyed by ball colour."""
    counts = {
        "r": (1, 9, 9),
        "y": (9, 1, 9),
        "o": (9, 9, 1),
        "b": (3, 1, 1),
        "g": (1, 3, 1),
        "p": (1, 1, 3),
    }
    return {k: normalize(v) for k, v in counts.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
