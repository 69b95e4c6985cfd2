"""Dense complex linear algebra kernel.

Operators are plain ``numpy`` arrays of dtype complex128. ``hermitian`` and
``as_matrix`` validate and normalize inputs; everything else is a pure
function of its arguments.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DomainError, InputError, NumericalError, SizeLimitError

DEFAULT_DIM_CAP = 2**14
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
# eigenvalues in [-ZERO_TOL, ZERO_TOL) count as non-negative
ZERO_TOL = 1e-12
LOG_FLOOR = 1e-15


def dim_cap() -> int:
    """Largest matrix dimension any routine may materialize.

    Overridable through the ``QMEMCAP_DIM_CAP`` environment variable.
    """
    raw = os.environ.get("QMEMCAP_DIM_CAP")
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InputError(f"QMEMCAP_DIM_CAP must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise InputError("QMEMCAP_DIM_CAP must be positive")
    return cap


def check_dim(dim: int, what: str = "matrix") -> None:
    cap = dim_cap()
    if dim > cap:
        raise SizeLimitError(
            f"{what} of dimension {dim} exceeds the materialization cap {cap} "
            "(set QMEMCAP_DIM_CAP to raise it, or use a factored evaluation)"
        )


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-d complex array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.size == 0:
        raise InputError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    return m


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate Hermitian symmetry and return the exactly symmetrized matrix."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise InputError(f"Hermitian operator must be square, got {m.shape}")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise InputError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns are orthonormal

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eig_hermitian(a) -> Spectrum:
    """Eigendecomposition with eigenvalues sorted in descending order."""
    h = hermitian(a)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def eigvals_hermitian(a) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(a)[::-1]
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc


def tensor(a, b) -> np.ndarray:
    """Kronecker product, refusing outputs larger than the dimension cap."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    check_dim(max(rows, cols), "tensor product")
    return np.kron(a, b)


def tensor_all(mats) -> np.ndarray:
    mats = list(mats)
    if not mats:
        return np.ones((1, 1), dtype=np.complex128)
    return reduce(tensor, mats)


def tensor_power(a, n: int) -> np.ndarray:
    if n < 0:
        raise InputError("tensor power must be non-negative")
    return tensor_all([a] * n)


def trace_norm(a) -> float:
    return float(np.sum(np.abs(eigvals_hermitian(hermitian(a)))))


def _apply_function(a, func, psd_tol: float = PSD_TOL) -> np.ndarray:
    spec = eig_hermitian(a)
    w = spec.eigenvalues
    if w.size and w[-1] < -psd_tol:
        raise DomainError(f"operator is not positive semidefinite (eigenvalue {w[-1]:.3e})")
    fw = func(np.clip(w, 0.0, None))
    v = spec.eigenvectors
    return hermitian((v * fw) @ v.conj().T)


def mat_sqrt(a, psd_tol: float = PSD_TOL) -> np.ndarray:
    return _apply_function(a, np.sqrt, psd_tol)


def _log2_or_zero(w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    pos = w > LOG_FLOOR
    out[pos] = np.log2(w[pos])
    return out


def mat_log2(a, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Base-2 matrix logarithm; the null eigenspace maps to 0 (0 log 0 = 0)."""
    return _apply_function(a, _log2_or_zero, psd_tol)


def fidelity(s, t) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(s) t sqrt(s)) of two positive operators.

    Not squared. Inputs need not be normalized; for states the value lies in [0, 1].
    """
    s = hermitian(s)
    t = hermitian(t)
    if s.shape != t.shape:
        raise InputError(f"fidelity of operators with shapes {s.shape} and {t.shape}")
    root = mat_sqrt(s)
    inner = eigvals_hermitian(hermitian(root @ t @ root, tol=1e-8))
    return float(np.sum(np.sqrt(np.clip(inner, 0.0, None))))


def positive_projector(a, tol: float = ZERO_TOL) -> np.ndarray:
    """Projector onto the span of eigenvectors with eigenvalue >= -tol."""
    spec = eig_hermitian(a)
    v = spec.eigenvectors[:, spec.eigenvalues >= -tol]
    return hermitian(v @ v.conj().T)


def negative_projector(a, tol: float = ZERO_TOL) -> np.ndarray:
    """Projector onto the span of eigenvectors with eigenvalue < -tol."""
    spec = eig_hermitian(a)
    v = spec.eigenvectors[:, spec.eigenvalues < -tol]
    return hermitian(v @ v.conj().T)


def helstrom_projectors(a, tol: float = ZERO_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Both projectors from a single eigendecomposition."""
    spec = eig_hermitian(a)
    keep = spec.eigenvalues >= -tol
    vp = spec.eigenvectors[:, keep]
    vm = spec.eigenvectors[:, ~keep]
    return hermitian(vp @ vp.conj().T), hermitian(vm @ vm.conj().T)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return hermitian(g @ g.conj().T)
