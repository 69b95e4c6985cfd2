"""Exact typical-subspace probabilities by type-class enumeration.

For an i.i.d. source the typicality of a sequence depends only on how many
times each letter occurs, so the probability of the typical set is a sum over
count vectors weighted by multinomial coefficients. This avoids building the
``d**n``-dimensional projectors altogether.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from . import matcore
from .channels import Ensemble, entropy_of_spectrum
from .errors import BoundNotReachedError, InputError

WINDOW_SLACK = 1e-12
CLASS_LIMIT = 2_000_000


def num_compositions(n: int, r: int) -> int:
    return math.comb(n + r - 1, r - 1)


def compositions(n: int, r: int) -> np.ndarray:
    """All count vectors of length ``r`` with entries summing to ``n``."""
    if r == 1:
        return np.array([[n]], dtype=np.int64)
    if r == 2:
        k = np.arange(n + 1, dtype=np.int64)
        return np.stack([n - k, k], axis=1)
    blocks = []
    for first in range(n, -1, -1):
        rest = compositions(n - first, r - 1)
        blocks.append(np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def log_multinomial(counts: np.ndarray) -> np.ndarray:
    """Natural log of n! / prod(c_k!) for each row of ``counts``."""
    n = counts.sum(axis=-1)
    return gammaln(n + 1.0) - gammaln(counts + 1.0).sum(axis=-1)


def in_window(deviation, width, slack: float = WINDOW_SLACK):
    """Half-open window [-width, width) widened by ``slack`` toward inclusion."""
    return (deviation >= -width - slack) & (deviation < width + slack)


@dataclass(frozen=True, eq=False)
class TypicalSpec:
    """Per-copy letter model for a typicality computation.

    ``base_spectrum`` are the per-copy letter probabilities, ``eigenvalues`` the
    value whose log enters the typicality statistic (equal to the letter
    probability for the average state, the branch eigenvalue lambda_{j,k} in the
    conditional case) and ``dim_weights`` the per-letter factor counted by the
    dimension (1 for the average state, p_j in the conditional case).
    """

    base_spectrum: np.ndarray
    eigenvalues: np.ndarray
    n: int
    epsilon: float
    center_entropy: float
    dim_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        w = np.asarray(self.base_spectrum, dtype=float)
        lam = np.asarray(self.eigenvalues, dtype=float)
        dw = np.ones_like(w) if self.dim_weights is None else np.asarray(self.dim_weights, dtype=float)
        if not (w.shape == lam.shape == dw.shape) or w.ndim != 1:
            raise InputError("letter arrays must be 1-d and of equal length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InputError(f"per-copy weights sum to {w.sum():.15g}, expected 1")
        if np.any(lam <= 0):
            raise InputError("eigenvalues entering the statistic must be positive")
        if self.n < 1:
            raise InputError("n must be at least 1")
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        # merge letters that share an eigenvalue: the statistic cannot tell them apart
        order = np.argsort(-lam, kind="stable")
        lam, w, dw = lam[order], w[order], dw[order]
        keys = np.round(np.log2(lam), 12)
        uniq, inv = np.unique(-keys, return_inverse=True)
        merged_w = np.bincount(inv, weights=w)
        merged_dw = np.bincount(inv, weights=dw)
        merged_lam = np.array([lam[inv == u][0] for u in range(uniq.size)])
        object.__setattr__(self, "base_spectrum", merged_w)
        object.__setattr__(self, "eigenvalues", merged_lam)
        object.__setattr__(self, "dim_weights", merged_dw)

    @property
    def log_values(self) -> np.ndarray:
        return np.log2(self.eigenvalues)

    def with_n(self, n: int) -> "TypicalSpec":
        return TypicalSpec(self.base_spectrum, self.eigenvalues, n, self.epsilon, self.center_entropy, self.dim_weights)

    def with_epsilon(self, epsilon: float) -> "TypicalSpec":
        return TypicalSpec(self.base_spectrum, self.eigenvalues, self.n, epsilon, self.center_entropy, self.dim_weights)

    @classmethod
    def for_state(cls, sigma, n: int, epsilon: float) -> "TypicalSpec":
        lam = matcore.eigvals_hermitian(matcore.hermitian(sigma))
        lam = lam[lam > matcore.LOG_FLOOR]
        lam = lam / lam.sum()
        return cls(lam, lam, n, epsilon, entropy_of_spectrum(lam))

    @classmethod
    def for_ensemble(cls, ens: Ensemble, n: int, epsilon: float) -> "TypicalSpec":
        weights, lams, dims = [], [], []
        center = 0.0
        for p, s in zip(ens.probs, ens.states):
            if p <= 0:
                continue
            lam = matcore.eigvals_hermitian(matcore.hermitian(s))
            lam = lam[lam > matcore.LOG_FLOOR]
            lam = lam / lam.sum()
            center += p * entropy_of_spectrum(lam)
            weights.append(p * lam)
            lams.append(lam)
            dims.append(np.full(lam.size, p))
        w = np.concatenate(weights)
        return cls(w / w.sum(), np.concatenate(lams), n, epsilon, center, np.concatenate(dims))


@dataclass(frozen=True)
class TypicalReport:
    probability_mass: float
    log2_dimension: float
    n: int
    epsilon: float
    center_entropy: float
    exact: bool = True
    half_width: float = 0.0

    @property
    def dimension_bound(self) -> float:
        return self.n * (self.center_entropy + self.epsilon)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    half_width: float  # 95% normal-approximation half-width
    samples: int

    def covers(self, value: float, widths: float = 1.0) -> bool:
        return abs(value - self.estimate) <= widths * self.half_width + 1e-15


def typical_classes(spec: TypicalSpec):
    """Count vectors, their log multiplicities and the typical mask."""
    counts = compositions(spec.n, spec.base_spectrum.size)
    logmult = log_multinomial(counts)
    deviation = counts @ spec.log_values / spec.n + spec.center_entropy
    return counts, logmult, in_window(deviation, spec.epsilon)


def _log_weight(counts, weights):
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.log(weights)
        # 0 * log 0 = 0: letters of zero weight only matter when they occur
        terms = np.where(counts > 0, counts * logw, 0.0)
    return terms.sum(axis=1)


def typical_report(spec: TypicalSpec, class_limit: int = CLASS_LIMIT, seed: int = 0) -> TypicalReport:
    if num_compositions(spec.n, spec.base_spectrum.size) > class_limit:
        mc = sample_typical_membership(spec, seed)
        return TypicalReport(mc.estimate, math.nan, spec.n, spec.epsilon, spec.center_entropy, False, mc.half_width)
    counts, logmult, typ = typical_classes(spec)
    if not np.any(typ):
        return TypicalReport(0.0, -math.inf, spec.n, spec.epsilon, spec.center_entropy)
    c = counts[typ]
    lm = logmult[typ]
    log_mass = logsumexp(lm + _log_weight(c, spec.base_spectrum))
    log_dim = logsumexp(lm + _log_weight(c, spec.dim_weights))
    mass = float(min(math.exp(log_mass), 1.0))
    return TypicalReport(mass, float(log_dim / math.log(2.0)), spec.n, spec.epsilon, spec.center_entropy)


def average_typical(sigma_bar, n: int, epsilon: float) -> TypicalReport:
    """Mass and dimension of the typical projector of sigma_bar^(x n)."""
    return typical_report(TypicalSpec.for_state(sigma_bar, n, epsilon))


def conditional_typical(ens_outputs: Ensemble, n: int, epsilon: float) -> TypicalReport:
    """Probability of the conditionally typical set of letter pairs (j, k).

    ``log2_dimension`` is log2 of the expected rank E_j Tr P_j over i.i.d.
    sequences j drawn from the ensemble weights.
    """
    return typical_report(TypicalSpec.for_ensemble(ens_outputs, n, epsilon))


def min_n_for_mass(spec_builder, target_mass: float, n_max: int, n_start: int = 1) -> int:
    """Smallest n in [n_start, n_max] whose typical mass exceeds ``target_mass``.

    ``spec_builder`` maps n to a TypicalReport or TypicalSpec.
    """
    if not 0.0 < target_mass < 1.0:
        raise InputError("target mass must lie in (0, 1)")
    best, best_n = -1.0, None
    for n in range(n_start, n_max + 1):
        rep = spec_builder(n)
        if isinstance(rep, TypicalSpec):
            rep = typical_report(rep)
        if rep.probability_mass > target_mass:
            return n
        if rep.probability_mass > best:
            best, best_n = rep.probability_mass, n
    raise BoundNotReachedError(
        f"typical mass {best:.6g} (at n={best_n}) never exceeded {target_mass} for n <= {n_max}",
        best=best,
        at=best_n,
    )


def sample_typical_membership(
    spec: TypicalSpec, rng_seed: int = 0, samples: int = 100_000, shards: int = 4, threads: int = 1
) -> MonteCarloEstimate:
    """Monte-Carlo estimate of the typical mass.

    Samples are split into ``shards`` streams with seeds spawned from ``rng_seed``,
    so the result does not depend on ``threads``.
    """
    seeds = np.random.SeedSequence(rng_seed).spawn(shards)
    sizes = [samples // shards + (1 if s < samples % shards else 0) for s in range(shards)]
    logs = spec.log_values

    def shard(args):
        seq, size = args
        rng = np.random.default_rng(seq)
        counts = rng.multinomial(spec.n, spec.base_spectrum, size=size)
        dev = counts @ logs / spec.n + spec.center_entropy
        return int(np.count_nonzero(in_window(dev, spec.epsilon)))

    jobs = list(zip(seeds, sizes))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            hits = sum(pool.map(shard, jobs))
    else:
        hits = sum(map(shard, jobs))
    est = hits / samples
    half = 1.96 * math.sqrt(est * (1.0 - est) / samples)
    return MonteCarloEstimate(est, half, samples)
