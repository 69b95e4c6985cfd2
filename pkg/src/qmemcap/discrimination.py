"""Helstrom measurements between branches and the branch-identifying preamble.

For each pair of branches (a, b) a probe state is sent ``m`` times; the
decoder measures the projectors onto the non-negative and negative
eigenspaces of gamma_a sigma_a^(x m) - gamma_b sigma_b^(x m). The composite
projector for branch i multiplies, over all pairs containing i, the outcome
that votes for i. Nothing here ever builds an operator on all ``m L`` copies:
traces of the composite projectors factor over pairs.

When the two single-copy outputs commute, the pair is handled exactly through
type classes of their common eigenbasis, so ``m`` can run into the thousands.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import matcore
from .channels import BranchMixture, KrausChannel, apply, as_mixture, pure_state
from .errors import BoundNotReachedError, IdenticalBranchError, InputError
from .typicality import compositions, log_multinomial

COMMUTE_TOL = 1e-12
DISTINCT_TOL = 1e-9
CHECK_SLACK = 1e-10
# relative tie tolerance between gamma_a*lambda^c and gamma_b*mu^c in the class path
CLASS_TIE_TOL = 1e-12


def common_eigenbasis(s, t, tol: float = 1e-10):
    """Unitary diagonalizing both ``s`` and ``t``, or None if they do not commute."""
    s = matcore.hermitian(s)
    t = matcore.hermitian(t)
    if np.max(np.abs(s @ t - t @ s)) > COMMUTE_TOL:
        return None
    spec = matcore.eig_hermitian(s)
    w, v = spec.eigenvalues, spec.eigenvectors
    cols = []
    start = 0
    while start < w.size:
        stop = start + 1
        while stop < w.size and abs(w[stop] - w[start]) <= 1e-10:
            stop += 1
        block = v[:, start:stop]
        _, u = np.linalg.eigh(block.conj().T @ t @ block)
        cols.append(block @ u)
        start = stop
    basis = np.hstack(cols)
    for op in (s, t):
        d = basis.conj().T @ op @ basis
        if np.max(np.abs(d - np.diag(np.diag(d)))) > tol:
            return None
    return basis


@dataclass(frozen=True, eq=False)
class _ClassData:
    basis: np.ndarray
    counts: np.ndarray
    logmult: np.ndarray
    plus: np.ndarray  # bool mask of classes assigned to the non-negative side


@dataclass(frozen=True, eq=False)
class PairwiseDiscriminator:
    i: int
    j: int
    gamma_i: float
    gamma_j: float
    sigma_i: np.ndarray  # single-copy outputs
    sigma_j: np.ndarray
    m: int
    probe: np.ndarray | None
    pi_plus: np.ndarray | None  # None when evaluated through type classes
    pi_minus: np.ndarray | None
    trace_abs_A: float
    pairwise_fidelity: float
    tr_plus_i: float  # Tr[pi_plus sigma_i^(x m)]
    tr_minus_j: float  # Tr[pi_minus sigma_j^(x m)]
    classes: _ClassData | None = None

    @property
    def factored(self) -> bool:
        return self.classes is not None

    @property
    def success_probability(self) -> float:
        """Helstrom success gamma_i Tr[P+ s_i] + gamma_j Tr[P- s_j] (unnormalized priors)."""
        return self.gamma_i * self.tr_plus_i + self.gamma_j * self.tr_minus_j

    def projector_traces(self, tau) -> tuple[float, float]:
        """(Tr[pi_plus tau^(x m)], Tr[pi_minus tau^(x m)]) for any single-copy state tau."""
        tau = np.asarray(tau, dtype=np.complex128)
        if self.classes is None:
            big = matcore.tensor_power(tau, self.m)
            return (float(np.real(np.trace(self.pi_plus @ big))), float(np.real(np.trace(self.pi_minus @ big))))
        c = self.classes
        diag = np.clip(np.real(np.diag(c.basis.conj().T @ tau @ c.basis)), 0.0, None)
        probs = np.exp(c.logmult + _class_log_weight(c.counts, diag))
        return float(probs[c.plus].sum()), float(probs[~c.plus].sum())

    def projectors_disjoint(self, tol: float = 1e-9) -> bool:
        if self.classes is not None:
            return True  # plus and minus are complementary class masks
        return bool(np.max(np.abs(self.pi_plus @ self.pi_minus)) <= tol)


def _class_log_weight(counts, diag):
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = np.log(diag)
        return np.where(counts > 0, counts * logd, 0.0).sum(axis=1)


def _pair_by_classes(gi, si, gj, sj, m, basis):
    lam = np.clip(np.real(np.diag(basis.conj().T @ si @ basis)), 0.0, None)
    mu = np.clip(np.real(np.diag(basis.conj().T @ sj @ basis)), 0.0, None)
    counts = compositions(m, lam.size)
    logmult = log_multinomial(counts)
    la = math.log(gi) + _class_log_weight(counts, lam)
    lb = math.log(gj) + _class_log_weight(counts, mu)
    with np.errstate(invalid="ignore"):
        plus = (la >= lb) | np.isclose(la, lb, rtol=0.0, atol=CLASS_TIE_TOL) | (np.isneginf(la) & np.isneginf(lb))
    pa = np.exp(logmult + la)  # gamma_i * class probability under sigma_i
    pb = np.exp(logmult + lb)
    trace_abs = float(np.sum(np.where(plus, pa - pb, pb - pa)))
    tr_plus_i = float(pa[plus].sum() / gi)
    tr_minus_j = float(pb[~plus].sum() / gj)
    return _ClassData(basis, counts, logmult, plus), trace_abs, tr_plus_i, tr_minus_j


def helstrom_pair(
    gamma_i: float,
    sigma_i,
    gamma_j: float,
    sigma_j,
    m: int,
    *,
    i: int = 0,
    j: int = 1,
    probe=None,
    method: str = "auto",
) -> PairwiseDiscriminator:
    """Helstrom discriminator between gamma_i sigma_i^(x m) and gamma_j sigma_j^(x m).

    ``method`` is "dense" (materialize the m-copy difference operator), "classes"
    (commuting outputs only) or "auto" (classes when the outputs commute).
    """
    if m < 1:
        raise InputError("number of copies m must be at least 1")
    if gamma_i <= 0 or gamma_j <= 0:
        raise InputError("branch weights must be positive")
    si = matcore.hermitian(sigma_i)
    sj = matcore.hermitian(sigma_j)
    if si.shape != sj.shape:
        raise InputError(f"output shapes differ: {si.shape} vs {sj.shape}")
    fid = matcore.fidelity(si, sj)
    basis = None
    if method in ("auto", "classes"):
        basis = common_eigenbasis(si, sj)
        if basis is None and method == "classes":
            raise InputError("class evaluation needs commuting outputs")
    elif method != "dense":
        raise InputError(f"unknown method {method!r}")

    if basis is not None:
        classes, trace_abs, tp, tm = _pair_by_classes(gamma_i, si, gamma_j, sj, m, basis)
        return PairwiseDiscriminator(i, j, gamma_i, gamma_j, si, sj, m, probe, None, None, trace_abs, fid, tp, tm, classes)

    matcore.check_dim(si.shape[0] ** m, f"{m}-copy difference operator")
    big_i = matcore.tensor_power(si, m)
    big_j = matcore.tensor_power(sj, m)
    diff = gamma_i * big_i - gamma_j * big_j
    spec = matcore.eig_hermitian(diff)
    keep = spec.eigenvalues >= -matcore.ZERO_TOL
    vp, vm = spec.eigenvectors[:, keep], spec.eigenvectors[:, ~keep]
    pi_plus = vp @ vp.conj().T
    pi_minus = vm @ vm.conj().T
    trace_abs = float(np.sum(np.abs(spec.eigenvalues)))
    tp = float(np.real(np.trace(pi_plus @ big_i)))
    tm = float(np.real(np.trace(pi_minus @ big_j)))
    return PairwiseDiscriminator(i, j, gamma_i, gamma_j, si, sj, m, probe, pi_plus, pi_minus, trace_abs, fid, tp, tm)


@dataclass(frozen=True)
class LpiReport:
    delta: float
    bound_i: float
    bound_j: float
    deviation_i: float  # |Tr[P+ s_i^(x m)] - 1|
    deviation_j: float  # |Tr[P- s_j^(x m)] - 1|
    fidelity_bound: float  # 2 f^m
    holds: bool
    delta_within_fidelity_bound: bool


def verify_lpi(d: PairwiseDiscriminator, gamma_i: float | None = None, gamma_j: float | None = None) -> LpiReport:
    """Check the projector conclusions implied by |Tr|A| - (g_i + g_j)| <= delta."""
    gi = d.gamma_i if gamma_i is None else gamma_i
    gj = d.gamma_j if gamma_j is None else gamma_j
    delta = abs(d.trace_abs_A - (gi + gj))
    bi, bj = delta / (2 * gi), delta / (2 * gj)
    dev_i, dev_j = abs(d.tr_plus_i - 1.0), abs(d.tr_minus_j - 1.0)
    fb = 2.0 * d.pairwise_fidelity**d.m
    holds = dev_i <= bi + CHECK_SLACK and dev_j <= bj + CHECK_SLACK
    return LpiReport(delta, bi, bj, dev_i, dev_j, fb, holds, delta <= fb + CHECK_SLACK)


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeConfig:
    seed: int = 0
    restarts: int = 6
    maxiter: int = 3000


def _vec(x):
    d = x.size // 2
    v = x[:d] + 1j * x[d:]
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def _output_fidelity(phi_i, phi_j, v):
    rho = np.outer(v, v.conj())
    return matcore.fidelity(apply(phi_i, rho), apply(phi_j, rho))


def choose_probe(phi_i: KrausChannel, phi_j: KrausChannel, cfg: ProbeConfig | None = None) -> np.ndarray:
    """Pure input minimizing the fidelity between the two branch outputs.

    Starts from each computational basis state, then from seeded random
    states; a later start replaces the incumbent only on a strict improvement.
    """
    cfg = cfg or ProbeConfig()
    if (phi_i.dim_in, phi_i.dim_out) != (phi_j.dim_in, phi_j.dim_out):
        raise InputError("branches must share input and output dimensions")
    d = phi_i.dim_in
    rng = np.random.default_rng(cfg.seed)
    starts = [np.concatenate([np.eye(d)[k], np.zeros(d)]) for k in range(d)]
    starts += [rng.normal(size=2 * d) for _ in range(cfg.restarts)]

    best_v, best_f = None, math.inf
    for x0 in starts:
        if best_f <= 1e-14:
            break  # orthogonal outputs: nothing left to improve
        f0 = _output_fidelity(phi_i, phi_j, _vec(x0))
        if f0 > 1e-14:
            res = minimize(
                lambda x: _output_fidelity(phi_i, phi_j, _vec(x)),
                x0,
                method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": cfg.maxiter},
            )
            x, f = (res.x, res.fun) if res.fun < f0 - 1e-12 else (x0, f0)
        else:
            x, f = x0, f0
        if f < best_f - 1e-12:
            best_v, best_f = _vec(x), f
    if best_f >= 1.0 - DISTINCT_TOL:
        raise IdenticalBranchError(
            f"branches are indistinguishable: minimal output fidelity {best_f:.12f} "
            "(merge identical branches into one with their combined weight)"
        )
    return pure_state(best_v)


# ---------------------------------------------------------------------------
# preamble
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Preamble:
    mixture: BranchMixture
    m: int
    pairs: tuple  # PairwiseDiscriminator in lexicographic (a, b) order
    probes: tuple

    @property
    def L(self) -> int:
        return len(self.pairs)

    @property
    def f(self) -> float:
        return max((p.pairwise_fidelity for p in self.pairs), default=0.0)

    @property
    def length(self) -> int:
        """Number of channel uses taken by the preamble."""
        return self.m * self.L

    def factor_kinds(self, i: int) -> list[str]:
        """Per-pair factor of the composite projector for branch i: 'I', '+' or '-'."""
        kinds = []
        for p in self.pairs:
            kinds.append("+" if p.i == i else "-" if p.j == i else "I")
        return kinds

    def identification_matrix(self) -> np.ndarray:
        """T[i, l] = Tr[composite projector l applied to branch i's preamble output]."""
        M = self.mixture.M
        t = np.ones((M, M))
        for p, probe in zip(self.pairs, self.probes):
            for i, branch in enumerate(self.mixture.branches):
                tp, tm = p.projector_traces(apply(branch, probe))
                t[i, p.i] *= tp
                t[i, p.j] *= tm
        return t

    def disjoint(self) -> bool:
        """Composite projectors are mutually orthogonal: every pair of branches meets in a pair factor P+ P- = 0."""
        M = self.mixture.M
        by_pair = {(p.i, p.j): p for p in self.pairs}
        for a, b in itertools.combinations(range(M), 2):
            p = by_pair.get((a, b))
            if p is None or not p.projectors_disjoint():
                return False
            if self.factor_kinds(a)[self.pairs.index(p)] != "+" or self.factor_kinds(b)[self.pairs.index(p)] != "-":
                return False
        return True


def preamble_builder(mixture: BranchMixture, probe_cfg: ProbeConfig | None = None, method: str = "auto"):
    """Choose probes once and return a function m -> Preamble."""
    mixture = as_mixture(mixture)
    pairs = list(itertools.combinations(range(mixture.M), 2))
    probes = tuple(choose_probe(mixture.branches[a], mixture.branches[b], probe_cfg) for a, b in pairs)
    outputs = [
        (apply(mixture.branches[a], w), apply(mixture.branches[b], w)) for (a, b), w in zip(pairs, probes)
    ]
    g = mixture.gammas

    def build(m: int) -> Preamble:
        discs = tuple(
            helstrom_pair(g[a], sa, g[b], sb, m, i=a, j=b, probe=w, method=method)
            for (a, b), w, (sa, sb) in zip(pairs, probes, outputs)
        )
        return Preamble(mixture, m, discs, probes)

    return build


def build_preamble(mixture: BranchMixture, m: int, probe_cfg: ProbeConfig | None = None, method: str = "auto") -> Preamble:
    return preamble_builder(mixture, probe_cfg, method)(m)


def branch_id_success(pre: Preamble, mixture: BranchMixture | None = None) -> list[float]:
    """Probability that branch i's preamble output lands in branch i's composite projector."""
    mixture = pre.mixture if mixture is None else as_mixture(mixture)
    M = mixture.M
    out = [1.0] * M
    for p, probe in zip(pre.pairs, pre.probes):
        tp, _ = p.projector_traces(apply(mixture.branches[p.i], probe))
        _, tm = p.projector_traces(apply(mixture.branches[p.j], probe))
        out[p.i] *= tp
        out[p.j] *= tm
    return out


def lemma_bound(f: float, m: int, gamma: float, M: int) -> float:
    """(1 - f^m / gamma)^(M-1), with the base clipped at 0."""
    return max(0.0, 1.0 - f**m / gamma) ** (M - 1)


def select_m(pre_builder, delta: float, m_max: int, m_start: int = 1) -> int:
    """Smallest m whose preamble identifies every branch with probability > 1 - delta."""
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    best, best_m = -1.0, None
    for m in range(m_start, m_max + 1):
        pre = pre_builder(m)
        worst = min(branch_id_success(pre))
        if worst > 1.0 - delta:
            return m
        if worst > best:
            best, best_m = worst, m
    raise BoundNotReachedError(
        f"branch identification reached only {best:.6g} (at m={best_m}) for m <= {m_max}", best=best, at=best_m
    )
