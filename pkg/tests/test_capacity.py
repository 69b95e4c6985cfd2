import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmemcap.capacity import (
    OptimizerConfig,
    _Support,
    _random_states,
    chi_vector,
    holevo_capacity,
    maximin_capacity,
    maximize_weights,
)
from qmemcap.channels import (
    BranchMixture,
    Ensemble,
    amplitude_damping,
    basis_state,
    dephasing,
    depolarizing,
    identity_channel,
    random_channel,
)
from conftest import h2
from oracles import amplitude_damping_capacity, bloch_grid_capacity, depolarize


def test_identity_and_fully_depolarizing():
    assert holevo_capacity(identity_channel()).value == pytest.approx(1.0, abs=1e-6)
    assert holevo_capacity(depolarizing(1.0)).value == pytest.approx(0.0, abs=1e-9)


def test_depolarizing_matches_closed_form_and_grid_oracle():
    res = holevo_capacity(depolarizing(0.5))
    oracle = bloch_grid_capacity([lambda r: depolarize(r, 0.5)], grid=21, weights=11)
    assert res.value == pytest.approx(1 - h2(0.25), abs=1e-4)
    assert res.value == pytest.approx(oracle, abs=1e-4)


def test_amplitude_damping_matches_one_parameter_oracle():
    res = holevo_capacity(amplitude_damping(0.3))
    assert res.value == pytest.approx(amplitude_damping_capacity(0.3), abs=1e-4)
    # the result is a certified lower bound
    assert res.value <= amplitude_damping_capacity(0.3) + 1e-9


def test_maximin_examples(dep_mixture):
    res = maximin_capacity(dep_mixture)
    assert res.value == pytest.approx(1 - h2(0.25), abs=1e-3)
    assert len(res.per_branch_chi) == 2
    assert res.value == pytest.approx(min(res.per_branch_chi), abs=1e-12)
    killed = BranchMixture(np.array([0.5, 0.5]), (identity_channel(), depolarizing(1.0)))
    assert maximin_capacity(killed).value == pytest.approx(0.0, abs=1e-9)


def test_single_branch_reduction():
    ch = amplitude_damping(0.2)
    a = maximin_capacity(BranchMixture(np.ones(1), (ch,))).value
    b = holevo_capacity(ch).value
    assert a == pytest.approx(b, abs=1e-6)


def test_chi_vector_examples(bit_ensemble):
    ch = amplitude_damping(0.4)
    same = BranchMixture(np.array([0.2, 0.3, 0.5]), (ch, ch, ch))
    v = chi_vector(same, bit_ensemble)
    assert np.ptp(v) < 1e-12
    single = Ensemble(np.ones(1), (basis_state(0),))
    assert np.allclose(chi_vector(same, single), 0.0, atol=1e-12)
    mix = BranchMixture(np.array([0.5, 0.5]), (identity_channel(), dephasing(0.5)))
    assert np.allclose(chi_vector(mix, bit_ensemble), [1.0, 1.0], atol=1e-12)


@pytest.mark.parametrize("gammas", [(0.5, 0.5), (0.9, 0.1), (0.01, 0.99)])
def test_gamma_invariance(dep_mixture, gammas):
    base = maximin_capacity(dep_mixture, OptimizerConfig(seed=3))
    other = maximin_capacity(dep_mixture.with_gammas(gammas), OptimizerConfig(seed=3))
    assert abs(base.value - other.value) <= 1e-9


@settings(max_examples=8)
@given(st.integers(0, 2**16))
def test_result_is_self_certifying(seed):
    rng = np.random.default_rng(seed)
    mix = BranchMixture(np.array([0.5, 0.5]), (random_channel(2, 2, rng), random_channel(2, 2, rng)))
    res = maximin_capacity(mix, OptimizerConfig(seed=seed, patience=5, max_iterations=60))
    again = chi_vector(mix, res.argmax_ensemble)
    assert np.allclose(again, res.per_branch_chi, atol=1e-9)
    assert res.value == pytest.approx(min(again), abs=1e-9)
    assert len(res.argmax_ensemble) <= 4


def test_support_cap_respected(dep_mixture):
    res = maximin_capacity(dep_mixture, OptimizerConfig(support_cap=2))
    assert res.support_cap == 2 and len(res.argmax_ensemble) <= 2
    res = maximin_capacity(dep_mixture, OptimizerConfig(support_cap=50))
    assert res.support_cap == 4


def test_monotone_in_budget():
    ch = amplitude_damping(0.45)
    values = [holevo_capacity(ch, OptimizerConfig(seed=1, max_iterations=k, patience=10**6)).value for k in (1, 3, 10, 30)]
    assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))


def test_budget_exhaustion_is_not_an_error():
    res = holevo_capacity(amplitude_damping(0.3), OptimizerConfig(max_iterations=2, patience=100))
    assert not res.converged and res.iterations == 2


def test_inner_problem_restarts_agree():
    rng = np.random.default_rng(5)
    branches = (depolarizing(0.2), amplitude_damping(0.5))
    sup = _Support(branches, _random_states(rng, 4, 2))
    values = []
    for _ in range(5):
        p0 = rng.dirichlet(np.ones(4))
        values.append(maximize_weights(sup, p0)[1])
    assert np.ptp(values) < 1e-7


def test_subgradient_inner_mode(dep_mixture):
    res = maximin_capacity(dep_mixture, OptimizerConfig(inner="subgradient"))
    assert res.value == pytest.approx(1 - h2(0.25), abs=1e-3)


def test_threads_give_a_valid_result(dep_mixture):
    res = maximin_capacity(dep_mixture, OptimizerConfig(threads=2, max_iterations=40))
    assert np.allclose(chi_vector(dep_mixture, res.argmax_ensemble), res.per_branch_chi, atol=1e-9)
