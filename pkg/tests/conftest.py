import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qmemcap.channels import BranchMixture, Ensemble, basis_state, depolarizing

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bit_ensemble():
    return Ensemble(np.array([0.5, 0.5]), (basis_state(0), basis_state(1)))


@pytest.fixture
def dep_mixture():
    return BranchMixture(np.array([0.5, 0.5]), (depolarizing(0.2), depolarizing(0.5)))


def h2(p):
    """Binary entropy written out independently of the package."""
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
