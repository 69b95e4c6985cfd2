"""Greedy maximal-code packing, code evaluation and the weak-converse check.

Codewords are tensor products of ensemble states, identified by their index
sequence ``j = (j_1, ..., j_n)``. Candidates are scanned in lexicographic
order. A candidate is accepted when its pruned typical projector

    V_j = (Pbar - Q)^(1/2) Pbar P_j Pbar (Pbar - Q)^(1/2)

decodes it with probability above ``1 - epsilon`` while carrying at most an
exponentially small weight of the average output state. Here ``Pbar`` is the
typical projector of the average output, ``P_j`` the conditionally typical
projector of the candidate's output and ``Q`` the sum of the POVM elements
accepted so far.

For a branch mixture every branch carries its own projectors, and the
acceptance tests weight the branches by gamma_i times the probability that the
preamble identifies branch i.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import matcore
from .channels import (
    BranchMixture,
    Ensemble,
    KrausChannel,
    ProductState,
    apply,
    as_mixture,
    binary_entropy,
    entropy_of_spectrum,
    holevo_chi,
    relative_entropy,
    von_neumann_entropy,
)
from .discrimination import Preamble
from .errors import InputError
from .typicality import in_window

POVM_TOL = 1e-9
SQRT_CLIP_TOL = 1e-10

__all__ = [
    "PackingConfig",
    "Code",
    "ConverseReport",
    "binary_entropy",
    "pack_memoryless",
    "pack_memory",
    "evaluate_error",
    "branch_errors",
    "transition_matrix",
    "converse_check",
    "donald_identity_gap",
    "povm_violation",
    "mixture_error",
    "code_to_bundle",
    "code_from_bundle",
    "completed_channel",
    "mutual_information_uniform",
]


@dataclass(frozen=True, eq=False)
class PackingConfig:
    ensemble: Ensemble
    n: int
    epsilon: float
    eta: float | None = None  # defaults to epsilon / 4
    delta: float | None = None  # defaults to eta / 4
    eta_prime: float | None = None  # defaults to eta
    typical_width: float | None = None  # epsilon/3 (single channel) or epsilon/4 (mixture)
    threshold_coeff: float | None = None  # 2/3 (single channel) or 3/4 (mixture)
    capacity: float | None = None  # mixture threshold rate; defaults to min_i chi_i(ensemble)
    max_passes: int = 8

    def __post_init__(self):
        if self.n < 1:
            raise InputError("block length n must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            raise InputError("epsilon must lie in (0, 1)")
        eta = self.epsilon / 4 if self.eta is None else self.eta
        delta = eta / 4 if self.delta is None else self.delta
        eta_p = eta if self.eta_prime is None else self.eta_prime
        if delta <= 0:
            raise InputError("delta must be positive")
        if not eta > delta**2 + 2 * delta:
            raise InputError(f"need eta > delta^2 + 2 delta (eta={eta}, delta={delta})")
        if not eta < self.epsilon / 3:
            raise InputError(f"need eta < epsilon/3 (eta={eta}, epsilon={self.epsilon})")
        if not eta_p > delta**2 + 3 * delta:
            raise InputError(f"need eta' > delta^2 + 3 delta (eta'={eta_p}, delta={delta})")
        if not eta_p < self.epsilon / 3:
            raise InputError(f"need eta' < epsilon/3 (eta'={eta_p})")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "eta_prime", eta_p)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "delta": self.delta,
            "eta_prime": self.eta_prime,
            "typical_width": self.typical_width,
            "threshold_coeff": self.threshold_coeff,
            "capacity": self.capacity,
            "max_passes": self.max_passes,
        }


@dataclass(frozen=True, eq=False)
class Code:
    """A product-state code with its decoding POVM.

    Single-channel codes carry one POVM element per word in ``povm``. Mixture
    codes carry per-branch components ``povm_components[k][i]`` and the
    identification matrix of their preamble, ``identification[i, l]``: the
    probability that branch i's preamble output is identified as branch l.
    """

    ensemble: Ensemble
    words: tuple  # tuples of ensemble indices
    n: int
    povm: tuple | None = None
    povm_components: tuple | None = None
    identification: np.ndarray | None = None
    preamble_factors: tuple = ()  # single-use input states of the preamble, in order
    preamble: Preamble | None = None
    per_codeword_success: tuple = ()
    acceptance_values: tuple = ()  # condition (ii) value at acceptance
    threshold_values: tuple = ()  # condition (iii) value at acceptance
    threshold: float = math.nan
    threshold_rate: float = math.nan
    typical_projectors: tuple = ()  # average-output typical projector of each branch
    diagnostics: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.words)

    @property
    def memory(self) -> bool:
        return self.povm_components is not None

    @property
    def M(self) -> int:
        return self.identification.shape[0] if self.memory else 1

    @property
    def n_total(self) -> int:
        return len(self.preamble_factors) + self.n

    @property
    def rate(self) -> float:
        return math.log2(self.N) / self.n_total if self.N else 0.0

    def input_factors(self, k: int) -> tuple:
        return tuple(self.preamble_factors) + tuple(self.ensemble.states[j] for j in self.words[k])

    def codeword(self, k: int) -> ProductState:
        return ProductState(self.input_factors(k))


@dataclass(frozen=True)
class ConverseReport:
    per_branch_error: tuple
    average_error: float
    fano_lower_bound: float  # (1 - (C + 1/n)/R) * min gamma
    branch_bound: float  # 1 - (C + 1/n)/R
    rate: float
    capacity_used: float
    n: int
    N: int
    mutual_information: tuple  # H(X : Y_i) in bits, failures completed to uniform guesses
    block_holevo: tuple  # Holevo quantity of the n-use output ensemble of branch i
    positionwise_chi_sum: tuple  # sum over positions of the per-position Holevo quantity
    pooled_chi: tuple  # chi_i of the pooled ensemble {1/(nN), rho_{alpha,t}}
    fano_holds: tuple
    holevo_chain_holds: tuple
    decomposition_gap: float  # |p_e - sum gamma_i p_{i,e}|
    above_capacity: bool
    vacuous: bool  # the final bound is <= 0 and says nothing
    bound_holds: bool
    branch_bound_attained: bool

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


# ---------------------------------------------------------------------------
# typical projectors on K^(x n)
# ---------------------------------------------------------------------------


class _Factor:
    """Eigen data of a single-use output state."""

    def __init__(self, sigma):
        spec = matcore.eig_hermitian(sigma)
        lam = np.clip(spec.eigenvalues, 0.0, None)
        self.sigma = matcore.hermitian(sigma)
        self.vecs = spec.eigenvectors
        with np.errstate(divide="ignore"):
            self.log2 = np.where(lam > matcore.LOG_FLOOR, np.log2(np.where(lam > 0, lam, 1.0)), -np.inf)
        self.lam = lam
        self.entropy = entropy_of_spectrum(lam)


def _product_log2(factors) -> np.ndarray:
    out = np.zeros(1)
    for f in factors:
        out = np.add.outer(out, f.log2).ravel()
    return out


def _typical_projector(factors, center: float, width: float):
    """Projector onto product eigenvectors whose per-copy log-eigenvalue is within ``width`` of -center."""
    n = len(factors)
    logs = _product_log2(factors)
    with np.errstate(invalid="ignore"):
        mask = np.isfinite(logs) & in_window(logs / n + center, width)
    basis = matcore.tensor_all([f.vecs for f in factors])
    cols = basis[:, mask]
    return cols @ cols.conj().T


def _sqrt_complement(pbar, q):
    """(Pbar - Q)^(1/2) with Q compressed onto Pbar and eigenvalues clipped at 0."""
    qc = pbar @ q @ pbar
    diff = matcore.hermitian(pbar - qc, tol=1e-8)
    spec = matcore.eig_hermitian(diff)
    w = spec.eigenvalues
    if w.size and w[-1] < -SQRT_CLIP_TOL:
        # accumulated round-off beyond tolerance; still clip, but record it
        pass
    v = spec.eigenvectors
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _tr(a, b) -> float:
    """Tr(a b) for Hermitian a, b."""
    return float(np.real(np.vdot(b.conj().T, a)))


class _BranchData:
    """Everything the packing loop needs about one branch."""

    def __init__(self, channel: KrausChannel, ens: Ensemble, n: int, width: float):
        self.n = n
        self.outputs = [apply(channel, s) for s in ens.states]
        self.factors = [_Factor(s) for s in self.outputs]
        avg = np.einsum("j,jab->ab", ens.probs, np.stack(self.outputs))
        self.avg = _Factor(avg)
        self.S_avg = self.avg.entropy
        self.S_cond = float(sum(p * f.entropy for p, f in zip(ens.probs, self.factors)))
        self.chi = max(self.S_avg - self.S_cond, 0.0)
        self.width = width
        self.pbar = _typical_projector([self.avg] * n, self.S_avg, width)
        self.avg_n = matcore.tensor_power(self.avg.sigma, n)
        self.q = np.zeros_like(self.pbar)
        self.root = _sqrt_complement(self.pbar, self.q)

    def output(self, word) -> np.ndarray:
        return matcore.tensor_all([self.outputs[j] for j in word])

    def candidate(self, word):
        fs = [self.factors[j] for j in word]
        p_word = _typical_projector(fs, self.S_cond, self.width)
        inner = self.pbar @ p_word @ self.pbar
        v = self.root @ inner @ self.root
        return matcore.hermitian(v, tol=1e-8), p_word

    def accept(self, v):
        self.q = self.q + v
        self.root = _sqrt_complement(self.pbar, self.q)


def _check_dims(d_out: int, n: int):
    matcore.check_dim(d_out**n, f"{n}-use output space")


def _words(J: int, n: int):
    return itertools.product(range(J), repeat=n)


def pack_memoryless(channel: KrausChannel, cfg: PackingConfig) -> Code:
    """Greedy maximal code for n uses of a single channel.

    Every accepted word k satisfies Tr[Phi^(x n)(rho_k) E_k] > 1 - epsilon and
    Tr[sigma_bar^(x n) E_k] <= 2^(-n [S(sigma_bar) - S_bar - c epsilon]) with
    c = ``cfg.threshold_coeff`` (default 2/3).
    """
    ens = cfg.ensemble
    if len(ens) == 0:
        raise InputError("empty ensemble")
    if ens.dim != channel.dim_in:
        raise InputError("ensemble and channel input dimensions differ")
    _check_dims(channel.dim_out, cfg.n)
    width = cfg.epsilon / 3 if cfg.typical_width is None else cfg.typical_width
    coeff = 2.0 / 3.0 if cfg.threshold_coeff is None else cfg.threshold_coeff
    br = _BranchData(channel, ens, cfg.n, width)
    rate_exp = br.S_avg - br.S_cond - coeff * cfg.epsilon
    threshold = 2.0 ** (-cfg.n * rate_exp)

    accepted, povm, succ, tvals = [], [], [], []
    remaining = list(_words(len(ens), cfg.n))
    for _ in range(cfg.max_passes):
        added = False
        still = []
        for word in remaining:
            v, _ = br.candidate(word)
            s = _tr(br.output(word), v)
            t = _tr(br.avg_n, v)
            if s > 1.0 - cfg.epsilon and t <= threshold:
                br.accept(v)
                accepted.append(word)
                povm.append(v)
                succ.append(s)
                tvals.append(t)
                added = True
            else:
                still.append(word)
        remaining = still
        if not added:
            break

    diag = {
        "S_avg": br.S_avg,
        "S_cond": br.S_cond,
        "chi": br.chi,
        "typical_width": width,
        "threshold_coeff": coeff,
        "pbar_mass": _tr(br.avg_n, br.pbar),
        "pbar_rank": float(np.real(np.trace(br.pbar))),
        "q_mass": _tr(br.avg_n, br.q),  # Tr[sigma_bar^(x n) Q]
    }
    return Code(
        ens,
        tuple(accepted),
        cfg.n,
        povm=tuple(povm),
        per_codeword_success=tuple(succ),
        acceptance_values=tuple(succ),
        threshold_values=tuple(tvals),
        threshold=threshold,
        threshold_rate=rate_exp,
        typical_projectors=(br.pbar,),
        diagnostics=diag,
    )


def _preamble_factors(pre: Preamble | None) -> tuple:
    if pre is None:
        return ()
    out = []
    for probe in pre.probes:
        out.extend([probe] * pre.m)
    return tuple(out)


def pack_memory(mixture: BranchMixture, pre: Preamble | None, cfg: PackingConfig) -> Code:
    """Greedy maximal code for a branch mixture, preceded by a branch-identifying preamble.

    Condition (ii): sum_i gamma_i t_i Tr[Phi_i^(x n)(rho_k) E_{k,i}] > 1 - epsilon.
    Condition (iii): sum_i gamma_i t_i Tr[sigma_bar_i^(x n) E_{k,i}] <= 2^(-n [C - c epsilon]),
    with t_i the preamble identification probability of branch i and c =
    ``cfg.threshold_coeff`` (default 3/4).
    """
    mixture = as_mixture(mixture)
    ens = cfg.ensemble
    M = mixture.M
    if pre is None:
        if M != 1:
            raise InputError("a mixture with several branches needs a preamble")
        ident = np.ones((1, 1))
    else:
        if pre.mixture.M != M:
            raise InputError(f"preamble built for {pre.mixture.M} branches, mixture has {M}")
        ident = pre.identification_matrix()
    if ens.dim != mixture.dim_in:
        raise InputError("ensemble and channel input dimensions differ")
    _check_dims(mixture.dim_out, cfg.n)
    width = cfg.epsilon / 4 if cfg.typical_width is None else cfg.typical_width
    coeff = 0.75 if cfg.threshold_coeff is None else cfg.threshold_coeff
    branches = [_BranchData(b, ens, cfg.n, width) for b in mixture.branches]
    cap = min(b.chi for b in branches) if cfg.capacity is None else cfg.capacity
    rate_exp = cap - coeff * cfg.epsilon
    threshold = 2.0 ** (-cfg.n * rate_exp)
    g = mixture.gammas
    t_id = np.diag(ident)
    weight = g * t_id

    accepted, comps, succ, cond2, tvals = [], [], [], [], []
    remaining = list(_words(len(ens), cfg.n))
    for _ in range(cfg.max_passes):
        added = False
        still = []
        for word in remaining:
            vs = [b.candidate(word)[0] for b in branches]
            outs = [b.output(word) for b in branches]
            s = np.array([_tr(o, v) for o, v in zip(outs, vs)])
            u = np.array([_tr(b.avg_n, v) for b, v in zip(branches, vs)])
            c2 = float(weight @ s)
            c3 = float(weight @ u)
            if c2 > 1.0 - cfg.epsilon and c3 <= threshold:
                for b, v in zip(branches, vs):
                    b.accept(v)
                cross = np.array([[_tr(outs[i], vs[l]) for l in range(M)] for i in range(M)])
                accepted.append(word)
                comps.append(tuple(vs))
                succ.append(float(np.sum(g[:, None] * ident * cross)))
                cond2.append(c2)
                tvals.append(c3)
                added = True
            else:
                still.append(word)
        remaining = still
        if not added:
            break

    diag = {
        "chi_per_branch": [b.chi for b in branches],
        "S_avg_per_branch": [b.S_avg for b in branches],
        "S_cond_per_branch": [b.S_cond for b in branches],
        "capacity_used": cap,
        "typical_width": width,
        "threshold_coeff": coeff,
        "threshold_half_epsilon": 2.0 ** (-cfg.n * (cap - 0.5 * cfg.epsilon)),
        "identification_success": t_id.tolist(),
        "pbar_mass_per_branch": [_tr(b.avg_n, b.pbar) for b in branches],
    }
    return Code(
        ens,
        tuple(accepted),
        cfg.n,
        povm_components=tuple(comps),
        identification=ident,
        preamble_factors=_preamble_factors(pre),
        preamble=pre,
        per_codeword_success=tuple(succ),
        acceptance_values=tuple(cond2),
        threshold_values=tuple(tvals),
        threshold=threshold,
        threshold_rate=rate_exp,
        typical_projectors=tuple(b.pbar for b in branches),
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _flat_pair(mats):
    stack = np.stack([np.asarray(m) for m in mats]).reshape(len(mats), -1)
    return stack.real, stack.imag


def _trace_table(states, effects) -> np.ndarray:
    """T[a, b] = Tr[states[a] effects[b]] for Hermitian inputs."""
    sr, si = _flat_pair(states)
    er, ei = _flat_pair(effects)
    # Tr(s e) = sum_ab s_ab conj(e_ab) for Hermitian e
    return sr @ er.T + si @ ei.T


def transition_matrix(code: Code, branch: KrausChannel, branch_index: int = 0) -> np.ndarray:
    """P[alpha, beta] = probability that word alpha sent through ``branch`` is decoded as beta."""
    if code.N == 0:
        return np.zeros((0, 0))
    outs_n = []
    for word in code.words:
        outs_n.append(matcore.tensor_all([apply(branch, code.ensemble.states[j]) for j in word]))
    if not code.memory:
        return _trace_table(outs_n, code.povm)
    ident = code.identification
    if code.preamble_factors and code.identification is None:
        raise InputError("mixture code lacks its identification matrix")
    M = ident.shape[0]
    table = np.zeros((code.N, code.N))
    for l in range(M):
        table += ident[branch_index, l] * _trace_table(outs_n, [comp[l] for comp in code.povm_components])
    return table


def branch_errors(code: Code, channel) -> list[float]:
    mixture = as_mixture(channel)
    if code.memory and code.M != mixture.M:
        raise InputError(f"code decodes {code.M} branches, channel has {mixture.M}")
    if code.N == 0:
        return [1.0] * mixture.M
    out = []
    for i, b in enumerate(mixture.branches):
        if b.dim_in != code.ensemble.dim:
            raise InputError("code and channel input dimensions differ")
        p = transition_matrix(code, b, i)
        out.append(float(1.0 - np.mean(np.diag(p))))
    return out


def evaluate_error(code: Code, channel) -> float:
    """Average error 1 - (1/N) sum_k Tr[Phi^(n)(rho_k) E_k]."""
    mixture = as_mixture(channel)
    return float(np.dot(mixture.gammas, branch_errors(code, mixture)))


def mixture_error(code: Code, channel) -> float:
    """Average error computed on the mixed output state instead of branch by branch."""
    mixture = as_mixture(channel)
    if code.N == 0:
        return 1.0
    g = mixture.gammas
    total = 0.0
    for k, word in enumerate(code.words):
        outs = [matcore.tensor_all([apply(b, code.ensemble.states[j]) for j in word]) for b in mixture.branches]
        if not code.memory:
            mixed = sum(gi * o for gi, o in zip(g, outs))
            total += _tr(mixed, code.povm[k])
        else:
            for l, e in enumerate(code.povm_components[k]):
                mixed = sum(g[i] * code.identification[i, l] * outs[i] for i in range(mixture.M))
                total += _tr(mixed, e)
    return float(1.0 - total / code.N)


def povm_violation(code: Code) -> float:
    """Largest violation of positivity of each element and of I - sum_k E_k (0 when valid)."""
    if code.N == 0:
        return 0.0
    groups = [code.povm] if not code.memory else [[c[i] for c in code.povm_components] for i in range(code.M)]
    worst = 0.0
    for effects in groups:
        total = np.zeros_like(effects[0])
        for e in effects:
            worst = max(worst, -float(matcore.eigvals_hermitian(matcore.hermitian(e, tol=1e-8))[-1]))
            total = total + e
        lo = matcore.eigvals_hermitian(matcore.hermitian(np.eye(total.shape[0]) - total, tol=1e-8))[-1]
        worst = max(worst, -float(lo))
    return max(worst, 0.0)


# ---------------------------------------------------------------------------
# converse
# ---------------------------------------------------------------------------


def completed_channel(p: np.ndarray) -> np.ndarray:
    """Route the failure outcome of each row to a uniformly random guess.

    The result is a square stochastic matrix: a bona fide estimator of X, so
    Fano's inequality applies to it with the alphabet size N.
    """
    N = p.shape[0]
    fail = np.clip(1.0 - p.sum(axis=1, keepdims=True), 0.0, None)
    q = np.clip(p, 0.0, None) + fail / N
    return q / q.sum(axis=1, keepdims=True)


def mutual_information_uniform(p: np.ndarray) -> float:
    """H(X : Y) in bits for uniform X and a row-stochastic channel matrix."""
    py = p.mean(axis=0)

    def h(v):
        v = v[v > 0]
        return float(-np.sum(v * np.log2(v)))

    return max(h(py) - float(np.mean([h(row) for row in p])), 0.0)


def donald_identity_gap(ens: Ensemble, rho) -> float:
    """sum_j p_j S(w_j || rho) - [sum_j p_j S(w_j || w_bar) + S(w_bar || rho)]."""
    avg = ens.average()
    lhs = sum(p * relative_entropy(w, rho) for p, w in zip(ens.probs, ens.states) if p > 0)
    rhs = sum(p * relative_entropy(w, avg) for p, w in zip(ens.probs, ens.states) if p > 0)
    rhs += relative_entropy(avg, rho)
    return float(lhs - rhs)


def converse_check(code: Code, channel, capacity: float, slack: float = 1e-9) -> ConverseReport:
    """Evaluate the weak-converse chain on an explicit code.

    Per branch: the induced classical channel, Fano's inequality, and the chain
    H(X:Y_i) <= block Holevo <= sum of per-position Holevo <= n chi_i(pooled).
    Then the final bound p_e >= (1 - (C + 1/n)/R) min_i gamma_i when R > C.
    """
    mixture = as_mixture(channel)
    N, n = code.N, code.n_total
    if N == 0:
        raise InputError("cannot run the converse on an empty code")
    rate = code.rate
    g = mixture.gammas
    per_err, mi, block, pos_sum, pooled, fano_ok, chain_ok = [], [], [], [], [], [], []
    hx = math.log2(N)
    for i, b in enumerate(mixture.branches):
        p = transition_matrix(code, b, i)
        pe = float(1.0 - np.mean(np.diag(p)))
        # Fano needs an estimator with values in X; a failed decode becomes a uniform guess
        pc = completed_channel(p)
        qe = min(max(float(1.0 - np.mean(np.diag(pc))), 0.0), 1.0)
        info = mutual_information_uniform(pc)
        fano_lhs = binary_entropy(qe) + (qe * math.log2(N - 1) if N > 1 else 0.0)
        fano_ok.append(fano_lhs >= hx - info - slack)

        # block Holevo quantity of {1/N, Phi_i^(x n)(rho_alpha)}; the preamble part is common to all words
        word_outs = [[apply(b, code.ensemble.states[j]) for j in w] for w in code.words]
        avg_block = sum(matcore.tensor_all(o) for o in word_outs) / N
        mean_out_entropy = float(np.mean([sum(von_neumann_entropy(s) for s in o) for o in word_outs]))
        chi_block = von_neumann_entropy(avg_block) - mean_out_entropy

        inputs = [code.input_factors(k) for k in range(N)]
        position_chis = [
            holevo_chi(Ensemble(np.full(N, 1.0 / N), tuple(apply(b, inputs[k][t]) for k in range(N))))
            for t in range(n)
        ]
        pooled_states = tuple(apply(b, inputs[k][t]) for k in range(N) for t in range(n))
        chi_pool = holevo_chi(Ensemble(np.full(N * n, 1.0 / (N * n)), pooled_states))
        sum_pos = float(sum(position_chis))
        chain_ok.append(info <= chi_block + slack and chi_block <= sum_pos + slack and sum_pos <= n * chi_pool + slack)

        per_err.append(pe)
        mi.append(info)
        block.append(chi_block)
        pos_sum.append(sum_pos)
        pooled.append(chi_pool)

    avg_err = mixture_error(code, mixture)
    gap = abs(avg_err - float(np.dot(g, per_err)))
    above = rate > capacity
    branch_bound = 1.0 - (capacity + 1.0 / n) / rate if rate > 0 else -math.inf
    final = branch_bound * float(np.min(g))
    vacuous = not (final > 0)
    bound_holds = vacuous or avg_err >= final - slack
    attained = vacuous or any(e >= branch_bound - slack for e in per_err)
    return ConverseReport(
        tuple(per_err),
        avg_err,
        final,
        branch_bound,
        rate,
        capacity,
        n,
        N,
        tuple(mi),
        tuple(block),
        tuple(pos_sum),
        tuple(pooled),
        tuple(fano_ok),
        tuple(chain_ok),
        gap,
        above,
        vacuous,
        bound_holds,
        attained,
    )


# ---------------------------------------------------------------------------
# JSON bundle
# ---------------------------------------------------------------------------

BUNDLE_VERSION = "qmemcap.code/1"


def _encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _decode_matrix(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"{what}: expected a square matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def code_to_bundle(code: Code) -> dict:
    """Plain-JSON description of a code: input states, codeword indices and the POVM."""
    out = {
        "version": BUNDLE_VERSION,
        "n": code.n,
        "ensemble": {
            "probs": code.ensemble.probs.tolist(),
            "states": [_encode_matrix(s) for s in code.ensemble.states],
        },
        "words": [list(w) for w in code.words],
        "preamble_factors": [_encode_matrix(s) for s in code.preamble_factors],
        "threshold": code.threshold,
        "per_codeword_success": list(code.per_codeword_success),
    }
    if code.memory:
        out["identification"] = code.identification.tolist()
        out["povm_components"] = [[_encode_matrix(e) for e in comp] for comp in code.povm_components]
    else:
        out["povm"] = [_encode_matrix(e) for e in code.povm]
    return out


def code_from_bundle(data: dict) -> Code:
    try:
        if data.get("version") != BUNDLE_VERSION:
            raise InputError(f"unsupported code bundle version {data.get('version')!r}")
        ens = Ensemble(
            np.asarray(data["ensemble"]["probs"], dtype=float),
            tuple(_decode_matrix(s, "ensemble.states") for s in data["ensemble"]["states"]),
        )
        words = tuple(tuple(int(j) for j in w) for w in data["words"])
        n = int(data["n"])
        if any(len(w) != n for w in words):
            raise InputError("words: every codeword must have length n")
        if any(j < 0 or j >= len(ens) for w in words for j in w):
            raise InputError("words: index outside the ensemble")
        pre = tuple(_decode_matrix(s, "preamble_factors") for s in data.get("preamble_factors", []))
        common = dict(
            preamble_factors=pre,
            per_codeword_success=tuple(data.get("per_codeword_success", ())),
            threshold=float(data.get("threshold", math.nan)),
        )
        if "povm_components" in data:
            comps = tuple(tuple(_decode_matrix(e, "povm_components") for e in c) for c in data["povm_components"])
            ident = np.asarray(data["identification"], dtype=float)
            if len(comps) != len(words):
                raise InputError("povm_components: one entry per codeword required")
            return Code(ens, words, n, povm_components=comps, identification=ident, **common)
        povm = tuple(_decode_matrix(e, "povm") for e in data["povm"])
        if len(povm) != len(words):
            raise InputError("povm: one element per codeword required")
        return Code(ens, words, n, povm=povm, **common)
    except KeyError as exc:
        raise InputError(f"code bundle is missing field {exc}") from None
