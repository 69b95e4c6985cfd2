"""States, Kraus channels, branch mixtures and entropic quantities.

States are ``numpy`` arrays. Entropies are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matcore
from .errors import DomainError, InputError

TRACE_TOL = 1e-9
PROB_TOL = 1e-12
KRAUS_TOL = 1e-9
SUPPORT_TOL = 1e-12
SUPPORT_WEIGHT_TOL = 1e-10

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def density_matrix(rho, tol: float = TRACE_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, PSD."""
    r = matcore.hermitian(rho)
    tr = np.trace(r).real
    if abs(tr - 1.0) > tol:
        raise InputError(f"density matrix has trace {tr:.12g}, expected 1")
    lo = matcore.eigvals_hermitian(r)[-1]
    if lo < -matcore.PSD_TOL:
        raise InputError(f"density matrix has negative eigenvalue {lo:.3e}")
    return r


def pure_state(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise InputError("zero vector is not a state")
    v = v / nrm
    return np.outer(v, v.conj())


def basis_state(k: int, dim: int = 2) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[k] = 1.0
    return np.outer(v, v.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128) / dim


def probability_vector(p, tol: float = PROB_TOL, strict: bool = False) -> np.ndarray:
    q = np.asarray(p, dtype=float).ravel()
    if q.size == 0:
        raise InputError("empty probability vector")
    if not np.all(np.isfinite(q)):
        raise InputError("probability vector has non-finite entries")
    if strict and np.any(q <= 0):
        raise InputError("probabilities must be strictly positive")
    if np.any(q < 0):
        raise InputError(f"negative probability {q.min():.3e}")
    if abs(q.sum() - 1.0) > tol:
        raise InputError(f"probabilities sum to {q.sum():.15g}, expected 1")
    return q


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPT map rho -> sum_r K_r rho K_r^dagger."""

    kraus: np.ndarray  # shape (r, dim_out, dim_in)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=np.complex128)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0:
            raise InputError(f"Kraus operators must form a (r, d_out, d_in) array, got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise InputError("Kraus operators have non-finite entries")
        gram = np.einsum("rai,raj->ij", k.conj(), k)
        deficit = np.max(np.abs(gram - np.eye(k.shape[2])))
        if deficit > KRAUS_TOL:
            raise InputError(f"Kraus operators are not trace preserving (completeness deficit {deficit:.3e})")
        object.__setattr__(self, "kraus", k)

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    def completeness_deficit(self) -> float:
        gram = np.einsum("rai,raj->ij", self.kraus.conj(), self.kraus)
        return float(np.max(np.abs(gram - np.eye(self.dim_in))))

    def same_map_as(self, other: "KrausChannel", tol: float = 1e-9) -> bool:
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            return False
        return bool(np.max(np.abs(choi(self) - choi(other))) <= tol)


def choi(channel: KrausChannel) -> np.ndarray:
    k = channel.kraus
    vecs = k.transpose(0, 2, 1).reshape(k.shape[0], -1)  # vec over (in, out)
    return np.einsum("ra,rb->ab", vecs, vecs.conj())


def apply(channel: KrausChannel, rho) -> np.ndarray:
    r = np.asarray(rho, dtype=np.complex128)
    if r.shape != (channel.dim_in, channel.dim_in):
        raise InputError(f"state of shape {r.shape} does not match channel input dim {channel.dim_in}")
    k = channel.kraus
    out = np.einsum("rai,ij,rbj->ab", k, r, k.conj())
    return 0.5 * (out + out.conj().T)


def apply_pure(channel: KrausChannel, psis: np.ndarray) -> np.ndarray:
    """Outputs for a batch of state vectors, shape (K, d_in) -> (K, d_out, d_out)."""
    v = np.einsum("rai,ki->kra", channel.kraus, psis)
    out = np.einsum("kra,krb->kab", v, v.conj())
    return 0.5 * (out + out.conj().transpose(0, 2, 1))


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel(np.eye(dim, dtype=np.complex128)[None])


def unitary_channel(u) -> KrausChannel:
    return KrausChannel(np.asarray(u, dtype=np.complex128)[None])


def depolarizing(p: float) -> KrausChannel:
    """Qubit depolarizing channel rho -> (1-p) rho + p I/2."""
    if not 0.0 <= p <= 4.0 / 3.0:
        raise InputError(f"depolarizing parameter {p} outside [0, 4/3]")
    ops = [math.sqrt(1 - 3 * p / 4) * PAULI_I] + [math.sqrt(p / 4) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    return KrausChannel(np.stack(ops))


def dephasing(p: float) -> KrausChannel:
    """Qubit dephasing rho -> (1-p) rho + p Z rho Z; Z-basis states are fixed points."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"dephasing parameter {p} outside [0, 1]")
    return KrausChannel(np.stack([math.sqrt(1 - p) * PAULI_I, math.sqrt(p) * PAULI_Z]))


def amplitude_damping(g: float) -> KrausChannel:
    if not 0.0 <= g <= 1.0:
        raise InputError(f"damping parameter {g} outside [0, 1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - g)]], dtype=np.complex128)
    k1 = np.array([[0, math.sqrt(g)], [0, 0]], dtype=np.complex128)
    return KrausChannel(np.stack([k0, k1]))


def random_channel(dim_in: int, dim_out: int, rng: np.random.Generator, rank: int = 2) -> KrausChannel:
    g = rng.normal(size=(rank * dim_out, dim_in)) + 1j * rng.normal(size=(rank * dim_out, dim_in))
    q, _ = np.linalg.qr(g)  # isometry dim_in -> rank*dim_out
    return KrausChannel(q.reshape(rank, dim_out, dim_in))


# ---------------------------------------------------------------------------
# ensembles, product states, mixtures
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ensemble:
    probs: np.ndarray
    states: tuple

    def __post_init__(self):
        p = probability_vector(self.probs)
        states = tuple(np.asarray(s, dtype=np.complex128) for s in self.states)
        if len(states) != p.size:
            raise InputError(f"{p.size} probabilities for {len(states)} states")
        dims = {s.shape for s in states}
        if len(dims) != 1:
            raise InputError(f"ensemble states have differing shapes {sorted(dims)}")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self):
        return len(self.states)

    def average(self) -> np.ndarray:
        return np.einsum("j,jab->ab", self.probs, np.stack(self.states))

    def through(self, channel: KrausChannel) -> "Ensemble":
        return Ensemble(self.probs, tuple(apply(channel, s) for s in self.states))


@dataclass(frozen=True, eq=False)
class ProductState:
    """Tensor product of single-system states, kept in factored form."""

    factors: tuple

    def __post_init__(self):
        fs = tuple(np.asarray(f, dtype=np.complex128) for f in self.factors)
        if not fs:
            raise InputError("a product state needs at least one factor")
        if len({f.shape for f in fs}) != 1:
            raise InputError("product state factors must share a dimension")
        object.__setattr__(self, "factors", fs)

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def factor_dim(self) -> int:
        return self.factors[0].shape[0]

    def materialize(self) -> np.ndarray:
        matcore.check_dim(self.factor_dim**self.n, "product state")
        return matcore.tensor_all(self.factors)


@dataclass(frozen=True, eq=False)
class BranchMixture:
    """Long-term memory channel: n uses act as sum_i gamma_i Phi_i^(x n)."""

    gammas: np.ndarray
    branches: tuple

    def __post_init__(self):
        g = probability_vector(self.gammas, strict=True)
        branches = tuple(self.branches)
        if len(branches) != g.size:
            raise InputError(f"{g.size} weights for {len(branches)} branches")
        dims = {(b.dim_in, b.dim_out) for b in branches}
        if len(dims) != 1:
            raise InputError(f"branches have differing (dim_in, dim_out): {sorted(dims)}")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "branches", branches)

    @property
    def M(self) -> int:
        return len(self.branches)

    @property
    def dim_in(self) -> int:
        return self.branches[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.branches[0].dim_out

    def with_gammas(self, gammas) -> "BranchMixture":
        return BranchMixture(np.asarray(gammas, dtype=float), self.branches)


def as_mixture(channel) -> BranchMixture:
    if isinstance(channel, BranchMixture):
        return channel
    if isinstance(channel, KrausChannel):
        return BranchMixture(np.ones(1), (channel,))
    raise InputError(f"expected a KrausChannel or BranchMixture, got {type(channel).__name__}")


@dataclass(frozen=True, eq=False)
class MixtureOutput:
    gammas: np.ndarray
    branch_outputs: tuple  # ProductState per branch

    def materialize(self) -> np.ndarray:
        return sum(g * out.materialize() for g, out in zip(self.gammas, self.branch_outputs))


def apply_product(channel: KrausChannel, state: ProductState) -> ProductState:
    return ProductState(tuple(apply(channel, f) for f in state.factors))


def apply_mixture(mixture: BranchMixture, state: ProductState) -> MixtureOutput:
    outs = tuple(apply_product(b, state) for b in mixture.branches)
    return MixtureOutput(mixture.gammas, outs)


# ---------------------------------------------------------------------------
# entropies
# ---------------------------------------------------------------------------


def entropy_of_spectrum(w) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > matcore.LOG_FLOOR]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho) -> float:
    w = matcore.eigvals_hermitian(matcore.hermitian(rho))
    return max(entropy_of_spectrum(w), 0.0)


def entropies(states: np.ndarray) -> np.ndarray:
    """Batched von Neumann entropies of a (K, d, d) stack."""
    w = np.linalg.eigvalsh(states)
    w = np.where(w > matcore.LOG_FLOOR, w, 1.0)
    return np.maximum(-np.sum(w * np.log2(w), axis=-1), 0.0)


def support_violation(omega, rho) -> bool:
    """True when omega has weight (> 1e-10) outside the support of rho."""
    spec = matcore.eig_hermitian(rho)
    null = spec.eigenvectors[:, spec.eigenvalues < SUPPORT_TOL]
    if null.shape[1] == 0:
        return False
    weight = np.real(np.trace(null.conj().T @ np.asarray(omega) @ null))
    return bool(weight > SUPPORT_WEIGHT_TOL)


def relative_entropy(omega, rho) -> float:
    """S(omega || rho) in bits; ``math.inf`` when the support condition fails."""
    omega = matcore.hermitian(omega)
    rho = matcore.hermitian(rho)
    if omega.shape != rho.shape:
        raise InputError(f"relative entropy of shapes {omega.shape} and {rho.shape}")
    if support_violation(omega, rho):
        return math.inf
    val = -von_neumann_entropy(omega) - np.real(np.trace(omega @ matcore.mat_log2(rho)))
    return max(float(val), 0.0)


def holevo_chi(ens: Ensemble) -> float:
    avg = ens.average()
    val = von_neumann_entropy(avg) - float(np.dot(ens.probs, entropies(np.stack(ens.states))))
    return max(val, 0.0)


def chi_through(channel: KrausChannel, ens: Ensemble) -> float:
    if ens.dim != channel.dim_in:
        raise InputError(f"ensemble dim {ens.dim} does not match channel input dim {channel.dim_in}")
    return holevo_chi(ens.through(channel))


def binary_entropy(p: float) -> float:
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"binary entropy argument {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))
