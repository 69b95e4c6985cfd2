"""Independent reference computations used by the tests.

Nothing here imports the package: each oracle recomputes its quantity from
scratch with plain numpy so that agreement is a genuine cross-check.
"""
import math

import numpy as np

PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def entropy_bits(rho):
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def depolarize(rho, p):
    return (1 - p) * rho + p * np.trace(rho) * np.eye(2) / 2


def bloch_state(theta, phi):
    v = np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])
    return np.outer(v, v.conj())


def chi_of(probs, outputs):
    avg = sum(p * s for p, s in zip(probs, outputs))
    return entropy_bits(avg) - sum(p * entropy_bits(s) for p, s in zip(probs, outputs))


def bloch_grid_capacity(channels, grid=41, weights=21):
    """max over antipodal pure pairs (grid on the sphere) and weights of min_i chi_i.

    ``channels`` are callables rho -> output. The coarse optimum is then refined
    by a local grid around it.
    """

    def value(theta, phi, q):
        a = bloch_state(theta, phi)
        b = np.eye(2) - a
        return min(chi_of((q, 1 - q), (ch(a), ch(b))) for ch in channels)

    best = (-1.0, 0.0, 0.0, 0.5)
    for theta in np.linspace(0, math.pi, grid):
        for phi in np.linspace(0, 2 * math.pi, grid, endpoint=False):
            for q in np.linspace(0.05, 0.95, weights):
                v = value(theta, phi, q)
                if v > best[0]:
                    best = (v, theta, phi, q)
    # local refinement
    _, t0, p0, q0 = best
    span_t, span_p, span_q = math.pi / grid, 2 * math.pi / grid, 0.9 / weights
    for _ in range(4):
        for theta in np.linspace(t0 - span_t, t0 + span_t, 9):
            for phi in np.linspace(p0 - span_p, p0 + span_p, 9):
                for q in np.clip(np.linspace(q0 - span_q, q0 + span_q, 9), 1e-3, 1 - 1e-3):
                    v = value(theta, phi, q)
                    if v > best[0]:
                        best = (v, theta, phi, q)
        _, t0, p0, q0 = best
        span_t, span_p, span_q = span_t / 4, span_p / 4, span_q / 4
    return best[0]


def amplitude_damping_capacity(g, points=200_001):
    """Closed-form single-parameter maximization for the amplitude-damping channel."""

    def h(p):
        p = np.clip(p, 1e-300, 1.0)
        q = np.clip(1 - p, 1e-300, 1.0)
        return -p * np.log2(p) - q * np.log2(q)

    q = np.linspace(0, 1, points)
    return float(np.max(h((1 - g) * q) - h((1 + np.sqrt(1 - 4 * g * (1 - g) * q**2)) / 2)))


def binomial_typical_mass(lam, n, eps):
    """Mass of the typical window for a two-letter source, in ten lines."""
    s = -sum(x * math.log2(x) for x in lam)
    mass = 0.0
    for k in range(n + 1):
        dev = -((n - k) * math.log2(lam[0]) + k * math.log2(lam[1])) / n - s
        if -eps - 1e-12 <= -dev < eps + 1e-12:
            mass += math.comb(n, k) * lam[0] ** (n - k) * lam[1] ** k
    return mass


def binomial_typical_log2_dim(lam, n, eps):
    s = -sum(x * math.log2(x) for x in lam)
    total = 0
    for k in range(n + 1):
        dev = ((n - k) * math.log2(lam[0]) + k * math.log2(lam[1])) / n + s
        if -eps - 1e-12 <= dev < eps + 1e-12:
            total += math.comb(n, k)
    return math.log2(total) if total else -math.inf


def convolution_typical_mass(letters, logs, n, eps, center):
    """Typical mass by brute-force convolution of the per-copy log-value distribution.

    ``letters`` are probabilities, ``logs`` the log2 values entering the statistic.
    The distribution of the summed statistic is tracked as a dict keyed by
    rounded sums.
    """
    dist = {0.0: 1.0}
    for _ in range(n):
        nxt = {}
        for total, p in dist.items():
            for w, lv in zip(letters, logs):
                key = round(total + lv, 9)
                nxt[key] = nxt.get(key, 0.0) + p * w
        dist = nxt
    return sum(p for total, p in dist.items() if -eps - 1e-12 <= total / n + center < eps + 1e-12)


def commuting_helstrom_success(ga, a, gb, b, m):
    """Per-hypothesis Helstrom success for two diagonal qubit states, by binomial sums.

    ``a`` and ``b`` are (p0, p1) diagonals. Outcome strings with k ones favour
    hypothesis a when ga a0^(m-k) a1^k >= gb b0^(m-k) b1^k.
    """
    sa = sb = 0.0
    for k in range(m + 1):
        wa = a[0] ** (m - k) * a[1] ** k
        wb = b[0] ** (m - k) * b[1] ** k
        if ga * wa >= gb * wb:
            sa += math.comb(m, k) * wa
        else:
            sb += math.comb(m, k) * wb
    return sa, sb


def grid_min_fidelity(phi_a, phi_b, grid=201):
    """Minimum output fidelity over pure qubit inputs on a Bloch-sphere grid (fidelity from eigenvalues)."""

    def fid(s, t):
        w, v = np.linalg.eigh(s)
        r = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
        return float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(r @ t @ r), 0, None))))

    best = math.inf
    for theta in np.linspace(0, math.pi, grid):
        for phi in np.linspace(0, 2 * math.pi, 8, endpoint=False):
            rho = bloch_state(theta, phi)
            best = min(best, fid(phi_a(rho), phi_b(rho)))
    return best
