"""Holevo capacity and the maximin product-state capacity of a branch mixture.

The search keeps a support of at most ``d**2`` pure input states. Each round
draws random perturbations of the support; for every proposal the input
weights are re-optimized (the weight problem is concave for a fixed support)
and the proposal is accepted only if the exact minimum over branches
improves. The best ensemble seen so far is always the one reported, so the
value is a certified lower bound: it is the maximin Holevo quantity of the
returned ensemble.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channels import BranchMixture, Ensemble, KrausChannel, apply_pure, as_mixture, chi_through, entropies
from .matcore import LOG_FLOOR

_INV_LN2 = 1.0 / math.log(2.0)


@dataclass(frozen=True)
class OptimizerConfig:
    seed: int = 0
    tol: float = 1e-7
    patience: int = 25
    max_iterations: int = 5000
    support_cap: int | None = None  # defaults to d**2
    proposals_per_round: int = 6
    initial_step: float = 0.5
    min_step: float = 1e-9
    temperature: float = 0.05  # soft-min temperature at round 0
    min_temperature: float = 1e-4
    anneal: float = 0.95
    inner_steps: int = 12
    inner: str = "softmin"  # "softmin" or "subgradient"
    threads: int = 1


@dataclass(frozen=True, eq=False)
class CapacityResult:
    value: float
    argmax_ensemble: Ensemble
    per_branch_chi: tuple
    iterations: int
    converged: bool
    support_cap: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "per_branch_chi": list(self.per_branch_chi),
            "iterations": self.iterations,
            "converged": self.converged,
            "support_cap": self.support_cap,
            "ensemble_probs": self.argmax_ensemble.probs.tolist(),
            "ensemble_size": len(self.argmax_ensemble),
        }


def chi_vector(mixture: BranchMixture, ens: Ensemble) -> list[float]:
    mixture = as_mixture(mixture)
    return [chi_through(b, ens) for b in mixture.branches]


# ---------------------------------------------------------------------------
# weight optimization for a fixed support
# ---------------------------------------------------------------------------


class _Support:
    """Branch outputs of a fixed set of pure inputs: the data of the concave weight problem."""

    def __init__(self, branches, psis):
        self.psis = psis
        self.outputs = np.stack([apply_pure(b, psis) for b in branches])  # (M, K, d, d)
        self.out_entropy = entropies(self.outputs)  # (M, K)

    def chis(self, p) -> np.ndarray:
        avg = np.einsum("k,mkab->mab", p, self.outputs)
        w = np.linalg.eigvalsh(avg)
        w = np.where(w > LOG_FLOOR, w, 1.0)
        s_avg = -np.sum(w * np.log2(w), axis=-1)
        return s_avg - self.out_entropy @ p

    def chis_and_grad(self, p):
        avg = np.einsum("k,mkab->mab", p, self.outputs)
        w, v = np.linalg.eigh(avg)
        pos = w > LOG_FLOOR
        logw = np.where(pos, np.log2(np.where(pos, w, 1.0)), math.log2(LOG_FLOOR))
        s_avg = -np.sum(np.where(pos, w * logw, 0.0), axis=-1)
        log_avg = np.einsum("mab,mb,mcb->mac", v, logw, v.conj())
        cross = np.real(np.einsum("mkab,mba->mk", self.outputs, log_avg))
        grad = -cross - _INV_LN2 - self.out_entropy
        return s_avg - self.out_entropy @ p, grad


def _softmin_weights(chis, temperature):
    z = -(chis - chis.min()) / temperature
    e = np.exp(z)
    return e / e.sum()


def _mirror_ascent(sup: _Support, p, steps, temperature, mode):
    """Exponentiated-gradient ascent on a smoothed (or sub-gradient) minimum over branches."""
    eta = math.log(2.0)
    for _ in range(steps):
        chis, grad = sup.chis_and_grad(p)
        if mode == "subgradient":
            w = np.zeros_like(chis)
            w[np.argmin(chis)] = 1.0
        else:
            w = _softmin_weights(chis, temperature)
        g = w @ grad
        z = eta * (g - g.max())
        p = p * np.exp(z)
        p = p / p.sum()
    return p


def _polish(sup: _Support, p0):
    """Solve max_p min_i chi_i(p) for the fixed support as an epigraph problem."""
    K = p0.size
    ones = np.ones(K)

    def ineq(x):
        return sup.chis(x[:K]) - x[K]

    def ineq_jac(x):
        _, g = sup.chis_and_grad(x[:K])
        return np.hstack([g, -np.ones((g.shape[0], 1))])

    x0 = np.append(p0, sup.chis(p0).min())
    cons = [
        {"type": "ineq", "fun": ineq, "jac": ineq_jac},
        {"type": "eq", "fun": lambda x: x[:K].sum() - 1.0, "jac": lambda x: np.append(ones, 0.0)[None]},
    ]
    res = minimize(
        lambda x: -x[K],
        x0,
        jac=lambda x: np.append(np.zeros(K), -1.0),
        bounds=[(0.0, 1.0)] * K + [(None, None)],
        constraints=cons,
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 300},
    )
    p = np.clip(res.x[:K], 0.0, None)
    if not np.all(np.isfinite(p)) or p.sum() <= 0:
        return p0
    p = p / p.sum()
    return p if sup.chis(p).min() >= sup.chis(p0).min() else p0


def maximize_weights(sup: _Support, p0=None, cfg: OptimizerConfig | None = None):
    """Best input weights for a fixed support; returns (p, exact maximin value)."""
    cfg = cfg or OptimizerConfig()
    K = sup.psis.shape[0]
    p = np.full(K, 1.0 / K) if p0 is None else np.asarray(p0, dtype=float)
    t = cfg.temperature
    while True:
        p = _mirror_ascent(sup, p, 20, t, cfg.inner)
        if t <= cfg.min_temperature:
            break
        t = max(t * 0.3, cfg.min_temperature)
    p = _polish(sup, p)
    return p, float(sup.chis(p).min())


# ---------------------------------------------------------------------------
# outer search
# ---------------------------------------------------------------------------


def _random_states(rng, k, d):
    v = rng.normal(size=(k, d)) + 1j * rng.normal(size=(k, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _propose(rng, psis, step):
    k, d = psis.shape
    new = psis.copy()
    kind = rng.random()
    if kind < 0.1:
        new[rng.integers(k)] = _random_states(rng, 1, d)[0]
    elif kind < 0.55:
        j = rng.integers(k)
        new[j] = new[j] + step * (rng.normal(size=d) + 1j * rng.normal(size=d))
    else:
        new = new + step * (rng.normal(size=(k, d)) + 1j * rng.normal(size=(k, d)))
    return new / np.linalg.norm(new, axis=1, keepdims=True)


def _as_result(sup: _Support, p, branches, iterations, converged, cap) -> CapacityResult:
    keep = p > 1e-12
    psis = sup.psis[keep]
    q = p[keep] / p[keep].sum()
    states = tuple(np.outer(v, v.conj()) for v in psis)
    ens = Ensemble(q, states)
    per_branch = tuple(chi_through(b, ens) for b in branches)
    return CapacityResult(min(per_branch), ens, per_branch, iterations, converged, cap)


def maximin_capacity(mixture, cfg: OptimizerConfig | None = None) -> CapacityResult:
    """Largest min_i chi(Phi_i(ensemble)) found over ensembles of pure states.

    The branch weights of the mixture are never read.
    """
    cfg = cfg or OptimizerConfig()
    mixture = as_mixture(mixture)
    branches = mixture.branches
    d = mixture.dim_in
    cap = cfg.support_cap or d * d
    cap = max(1, min(cap, d * d))
    rng = np.random.default_rng(cfg.seed)

    best_sup = _Support(branches, _random_states(rng, cap, d))
    best_p, best_val = maximize_weights(best_sup, None, cfg)

    step = cfg.initial_step
    temperature = cfg.temperature
    stale = 0
    converged = False
    rounds = 0
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None

    def evaluate(psis):
        sup = _Support(branches, psis)
        p = _mirror_ascent(sup, best_p.copy(), cfg.inner_steps, temperature, cfg.inner)
        return sup, p, float(sup.chis(p).min())

    try:
        while rounds < cfg.max_iterations:
            rounds += 1
            proposals = [_propose(rng, best_sup.psis, step) for _ in range(cfg.proposals_per_round)]
            results = list(pool.map(evaluate, proposals)) if pool else [evaluate(x) for x in proposals]
            sup, p, val = max(results, key=lambda r: r[2])
            improvement = 0.0
            if val > best_val:
                p, val = maximize_weights(sup, p, cfg)
                improvement = val - best_val
                best_sup, best_p, best_val = sup, p, val
                step = min(step * 1.5, 1.0)
            else:
                step = max(step * 0.7, cfg.min_step)
            temperature = max(temperature * cfg.anneal, cfg.min_temperature)
            stale = stale + 1 if improvement < cfg.tol else 0
            if stale >= cfg.patience:
                converged = True
                break
    finally:
        if pool:
            pool.shutdown()
    return _as_result(best_sup, best_p, branches, rounds, converged, cap)


def holevo_capacity(channel: KrausChannel, cfg: OptimizerConfig | None = None) -> CapacityResult:
    return maximin_capacity(as_mixture(channel), cfg)
