import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmemcap import matcore
from qmemcap.channels import (
    BranchMixture,
    Ensemble,
    KrausChannel,
    ProductState,
    amplitude_damping,
    apply,
    apply_mixture,
    basis_state,
    binary_entropy,
    chi_through,
    dephasing,
    depolarizing,
    holevo_chi,
    identity_channel,
    maximally_mixed,
    pure_state,
    random_channel,
    relative_entropy,
    von_neumann_entropy,
)
from qmemcap.errors import DomainError, InputError
from conftest import h2
from strategies import density_matrices, probability_vectors, seeds

PLUS = pure_state(np.array([1, 1]) / np.sqrt(2))


def test_kraus_completeness_checked():
    with pytest.raises(InputError):
        KrausChannel(np.stack([np.eye(2), np.eye(2)]))
    assert depolarizing(0.3).completeness_deficit() < 1e-12
    assert amplitude_damping(0.4).completeness_deficit() < 1e-12


@given(density_matrices(2))
def test_apply_examples(rho):
    assert np.allclose(apply(identity_channel(), rho), rho)
    assert np.allclose(apply(depolarizing(1.0), rho), np.eye(2) / 2)
    assert np.allclose(apply(depolarizing(0.5), basis_state(0)), np.diag([0.75, 0.25]))


@given(seeds(), st.integers(1, 3), st.integers(1, 3))
def test_apply_is_cptp(seed, d_in, d_out):
    rng = np.random.default_rng(seed)
    ch = random_channel(d_in, d_out, rng, rank=3)
    rho = matcore.random_psd(d_in, rng)
    rho /= np.trace(rho).real
    out = apply(ch, rho)
    assert abs(np.trace(out) - 1) < 1e-9
    assert matcore.eigvals_hermitian(out)[-1] >= -1e-10


def test_apply_rejects_wrong_dimension():
    with pytest.raises(InputError):
        apply(identity_channel(2), np.eye(3) / 3)


def test_mixture_validation():
    with pytest.raises(InputError):
        BranchMixture(np.array([1.0, 0.0]), (identity_channel(), depolarizing(0.5)))
    with pytest.raises(InputError):
        BranchMixture(np.array([0.6, 0.6]), (identity_channel(), depolarizing(0.5)))
    with pytest.raises(InputError):
        BranchMixture(np.array([0.5, 0.5]), (identity_channel(2), identity_channel(3)))


def test_apply_mixture_expansion():
    mix = BranchMixture(np.array([0.5, 0.5]), (identity_channel(), depolarizing(1.0)))
    rho = ProductState((basis_state(0), basis_state(0)))
    out = apply_mixture(mix, rho)
    ket = np.zeros(4)
    ket[0] = 1
    expect = 0.5 * np.outer(ket, ket) + 0.5 * np.eye(4) / 4
    assert np.allclose(out.materialize(), expect)
    single = apply_mixture(BranchMixture(np.ones(1), (depolarizing(0.3),)), rho)
    assert np.allclose(single.materialize(), np.kron(*(apply(depolarizing(0.3), basis_state(0)),) * 2))


@given(probability_vectors(3), density_matrices(2))
def test_identical_branches_ignore_gammas(g, rho):
    ch = amplitude_damping(0.3)
    mix = BranchMixture(g, (ch, ch, ch))
    state = ProductState((rho, rho))
    assert np.allclose(apply_mixture(mix, state).materialize(), np.kron(apply(ch, rho), apply(ch, rho)))


def test_entropy_examples():
    assert von_neumann_entropy(PLUS) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(maximally_mixed(2)) == pytest.approx(1.0)
    assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(h2(0.25), abs=1e-12)


def test_relative_entropy_examples():
    rho = np.diag([0.3, 0.7])
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert relative_entropy(basis_state(0), maximally_mixed(2)) == pytest.approx(1.0)
    assert relative_entropy(np.diag([0.9, 0.1]), maximally_mixed(2)) == pytest.approx(1 - h2(0.1), abs=1e-12)
    assert relative_entropy(maximally_mixed(2), basis_state(0)) == math.inf


def test_holevo_examples():
    assert holevo_chi(Ensemble(np.ones(1), (np.diag([0.3, 0.7]),))) == pytest.approx(0.0, abs=1e-12)
    bit = Ensemble(np.array([0.5, 0.5]), (basis_state(0), basis_state(1)))
    assert holevo_chi(bit) == pytest.approx(1.0)
    ens = Ensemble(np.array([0.5, 0.5]), (basis_state(0), PLUS))
    assert holevo_chi(ens) == pytest.approx(h2((1 + np.sqrt(2) / 2) / 2), abs=1e-12)
    assert chi_through(identity_channel(), ens) == pytest.approx(holevo_chi(ens))
    assert chi_through(depolarizing(1.0), ens) == pytest.approx(0.0, abs=1e-12)
    assert chi_through(depolarizing(0.5), bit) == pytest.approx(1 - h2(0.25), abs=1e-12)
    assert chi_through(dephasing(0.5), bit) == pytest.approx(1.0)


@given(probability_vectors(3), density_matrices(3), density_matrices(3), density_matrices(3, rank=1))
def test_holevo_properties(p, a, b, c):
    ens = Ensemble(p, (a, b, c))
    chi = holevo_chi(ens)
    avg = ens.average()
    assert 0.0 <= chi <= von_neumann_entropy(avg) + 1e-10 <= math.log2(3) + 1e-9
    as_divergence = sum(pj * relative_entropy(s, avg) for pj, s in zip(p, ens.states))
    assert chi == pytest.approx(as_divergence, abs=1e-8)


@given(probability_vectors(2), density_matrices(2))
def test_holevo_zero_for_equal_states(p, rho):
    assert holevo_chi(Ensemble(p, (rho, rho))) == pytest.approx(0.0, abs=1e-8)


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.25) == pytest.approx(0.811278, abs=1e-6)
    with pytest.raises(DomainError):
        binary_entropy(1.5)
