import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmemcap.channels import Ensemble, basis_state, entropy_of_spectrum, maximally_mixed
from qmemcap.errors import BoundNotReachedError, InputError
from qmemcap.typicality import (
    TypicalSpec,
    average_typical,
    compositions,
    conditional_typical,
    min_n_for_mass,
    num_compositions,
    sample_typical_membership,
    typical_report,
)
from oracles import binomial_typical_log2_dim, binomial_typical_mass, convolution_typical_mass

QUBIT = np.diag([0.75, 0.25])


def test_compositions_enumerate_everything():
    c = compositions(5, 3)
    assert c.shape == (num_compositions(5, 3), 3)
    assert np.all(c.sum(axis=1) == 5)
    assert len({tuple(r) for r in c}) == c.shape[0]


def test_binomial_oracle_agreement():
    rep = average_typical(QUBIT, 50, 0.1)
    assert rep.probability_mass == pytest.approx(binomial_typical_mass((0.75, 0.25), 50, 0.1), abs=1e-12)
    assert rep.log2_dimension == pytest.approx(binomial_typical_log2_dim((0.75, 0.25), 50, 0.1), abs=1e-9)


@given(st.integers(1, 120), st.floats(0.01, 0.6), st.floats(0.55, 0.98))
def test_binomial_oracle_property(n, eps, a):
    rep = average_typical(np.diag([a, 1 - a]), n, eps)
    assert rep.probability_mass == pytest.approx(binomial_typical_mass((a, 1 - a), n, eps), abs=1e-12)


def test_degenerate_and_pure_states():
    for n in (1, 7, 40):
        rep = average_typical(maximally_mixed(2), n, 0.01)
        assert rep.probability_mass == pytest.approx(1.0)
        assert rep.log2_dimension == pytest.approx(n)
        pure = average_typical(basis_state(1), n, 0.01)
        assert pure.probability_mass == pytest.approx(1.0) and pure.log2_dimension == pytest.approx(0.0)


def test_conditional_four_letter_oracle():
    ens = Ensemble(np.array([0.5, 0.5]), (np.diag([0.9, 0.1]), np.diag([0.75, 0.25])))
    rep = conditional_typical(ens, 40, 0.15)
    letters = [0.45, 0.05, 0.375, 0.125]
    logs = [math.log2(x) for x in (0.9, 0.1, 0.75, 0.25)]
    center = 0.5 * entropy_of_spectrum([0.9, 0.1]) + 0.5 * entropy_of_spectrum([0.75, 0.25])
    assert rep.center_entropy == pytest.approx(center)
    assert rep.probability_mass == pytest.approx(convolution_typical_mass(letters, logs, 40, 0.15, center), abs=1e-12)


def test_conditional_trivial_cases():
    pure = Ensemble(np.array([0.3, 0.7]), (basis_state(0), basis_state(0)))
    assert conditional_typical(pure, 12, 0.05).probability_mass == pytest.approx(1.0)
    single = Ensemble(np.ones(1), (QUBIT,))
    for n, eps in [(10, 0.1), (33, 0.05), (80, 0.2)]:
        a = conditional_typical(single, n, eps)
        b = average_typical(QUBIT, n, eps)
        assert a.probability_mass == pytest.approx(b.probability_mass, abs=1e-12)
        assert a.log2_dimension == pytest.approx(b.log2_dimension, abs=1e-12)


@given(st.integers(1, 200), st.floats(0.005, 0.5))
def test_dimension_bound(n, eps):
    rep = average_typical(QUBIT, n, eps)
    assert rep.log2_dimension <= rep.dimension_bound + 1e-9
    ens = Ensemble(np.array([0.4, 0.6]), (np.diag([0.9, 0.1]), np.diag([0.6, 0.4])))
    rep = conditional_typical(ens, min(n, 60), eps)
    assert rep.log2_dimension <= rep.dimension_bound + 1e-9


@given(st.integers(1, 150), st.floats(0.005, 0.4), st.floats(0.0, 0.3))
def test_mass_nondecreasing_in_epsilon(n, eps, extra):
    a = average_typical(QUBIT, n, eps).probability_mass
    b = average_typical(QUBIT, n, eps + extra).probability_mass
    assert b >= a - 1e-12


def test_min_n_for_mass():
    assert min_n_for_mass(lambda n: TypicalSpec.for_state(maximally_mixed(2), n, 0.1), 0.99, 10) == 1
    assert min_n_for_mass(lambda n: TypicalSpec.for_state(basis_state(0), n, 0.1), 0.99, 10) == 1
    n = min_n_for_mass(lambda n: TypicalSpec.for_state(QUBIT, n, 0.1), 0.99, 2000)
    # independent scan with the binomial oracle
    masses = [binomial_typical_mass((0.75, 0.25), k, 0.1) for k in range(1, n + 1)]
    assert masses[-1] > 0.99 and all(m <= 0.99 for m in masses[:-1])
    with pytest.raises(BoundNotReachedError) as err:
        min_n_for_mass(lambda n: TypicalSpec.for_state(QUBIT, n, 0.1), 0.99, 20)
    assert 0 < err.value.best < 0.99 and 1 <= err.value.at <= 20


def test_monte_carlo_covers_exact():
    spec = TypicalSpec.for_state(QUBIT, 50, 0.1)
    mc = sample_typical_membership(spec, rng_seed=11, samples=100_000)
    assert mc.covers(typical_report(spec).probability_mass, widths=3)


def test_monte_carlo_extremes():
    assert sample_typical_membership(TypicalSpec.for_state(maximally_mixed(2), 30, 0.01), 0, 2000).estimate == 1.0
    # n=1: the statistic is -log2 of a single eigenvalue, far from the entropy
    assert sample_typical_membership(TypicalSpec.for_state(QUBIT, 1, 0.01), 0, 2000).estimate == 0.0


def test_monte_carlo_thread_independent():
    spec = TypicalSpec.for_state(QUBIT, 64, 0.1)
    a = sample_typical_membership(spec, 3, 20_000, shards=4, threads=1)
    b = sample_typical_membership(spec, 3, 20_000, shards=4, threads=3)
    assert a == b


def test_large_alphabet_falls_back_to_sampling():
    spec = TypicalSpec.for_state(np.diag([0.4, 0.3, 0.2, 0.1]), 150, 0.1)
    rep = typical_report(spec, class_limit=1000)
    assert not rep.exact and math.isnan(rep.log2_dimension) and rep.half_width > 0
    exact = typical_report(spec)
    assert exact.exact
    assert abs(rep.probability_mass - exact.probability_mass) <= 3 * rep.half_width


def test_equal_eigenvalues_are_merged():
    spec = TypicalSpec.for_state(np.diag([0.25, 0.25, 0.5]), 10, 0.1)
    assert spec.eigenvalues.size == 2


def test_invalid_specs():
    with pytest.raises(InputError):
        TypicalSpec(np.array([0.5, 0.4]), np.array([0.5, 0.4]), 3, 0.1, 1.0)
    with pytest.raises(InputError):
        TypicalSpec.for_state(QUBIT, 0, 0.1)
    with pytest.raises(InputError):
        TypicalSpec.for_state(QUBIT, 3, 0.0)
