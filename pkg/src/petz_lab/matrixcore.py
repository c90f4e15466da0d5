"""Small dense Hermitian linear algebra for qubit states and two-qubit Choi matrices.

Every routine accepts either a single square matrix or a stack of them with
shape ``(..., d, d)``.  Stacks of 2x2 matrices go through a closed-form
eigensolver, which is what keeps the Monte Carlo sweeps fast; other
dimensions defer to LAPACK.
"""

from __future__ import annotations

import math

import numpy as np

from petz_lab.errors import NotPSDError, NumericalError, PreconditionError

HERMITIAN_RTOL = 1e-12
CLAMP_TOL = 1e-12
PSD_TOL = 1e-9
PINV_RCOND = 1e-12
TRACE_TOL = 1e-12
ROUNDOFF_FLOOR = 16 * np.finfo(float).eps

__all__ = [
    "as_density_matrix",
    "eig_hermitian",
    "fidelity",
    "is_hermitian",
    "ket_projector",
    "matrix_invsqrt_pinv",
    "matrix_sqrt",
    "relative_entropy",
    "trace_distance",
    "trace_norm",
]


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise PreconditionError(f"expected square matrix (stack), got shape {a.shape}")
    return a


def _dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    """True if every matrix in ``a`` is Hermitian within ``rtol * (1 + max|a_ij|)``."""
    a = _square(a)
    scale = 1.0 + np.max(np.abs(a), axis=(-1, -2))
    err = np.max(np.abs(a - _dagger(a)), axis=(-1, -2))
    return bool(np.all(err <= rtol * scale))


def _eig2_one(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Scalar twin of _eig2; array overhead dominates for a single matrix.
    x = a[0, 0].real
    y = a[1, 1].real
    b = 0.5 * (complex(a[0, 1]) + complex(a[1, 0]).conjugate())
    mean = 0.5 * (x + y)
    half = 0.5 * (x - y)
    r = math.hypot(half, abs(b))
    det = x * y - abs(b) ** 2
    big = mean + r if mean >= 0 else mean - r
    small = det / big if big != 0 else 0.0
    w = np.array(sorted((small, big)))
    lam = mean + r
    if half >= 0:
        v0, v1 = lam - y, b.conjugate()
    else:
        v0, v1 = b, lam - x
    norm = math.sqrt(abs(v0) ** 2 + abs(v1) ** 2)
    if norm <= 1e-300:
        return w, np.eye(2, dtype=complex)
    v0, v1 = v0 / norm, v1 / norm
    v = np.array([[-v1.conjugate(), v0], [v0.conjugate(), v1]], dtype=complex)
    return w, v


def _eig2(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Closed form for stacks of 2x2 Hermitian matrices [[x, b], [conj(b), y]].
    if a.ndim == 2:
        return _eig2_one(a)
    x = a[..., 0, 0].real
    y = a[..., 1, 1].real
    b = 0.5 * (a[..., 0, 1] + np.conj(a[..., 1, 0]))
    mean = 0.5 * (x + y)
    half = 0.5 * (x - y)
    r = np.hypot(half, np.abs(b))
    # mean -/+ r cancels for nearly singular input; recover the small
    # eigenvalue from the determinant instead.
    det = x * y - np.abs(b) ** 2
    big = np.where(mean >= 0, mean + r, mean - r)
    small = np.where(big != 0, det / np.where(big != 0, big, 1.0), 0.0)
    lo = np.where(mean >= 0, small, big)
    hi = np.where(mean >= 0, big, small)
    w = np.stack([np.minimum(lo, hi), np.maximum(lo, hi)], axis=-1)

    # Eigenvector of the upper eigenvalue; pick the better-conditioned of the
    # two null-space candidates of (A - lam I).
    lam = mean + r
    use_row1 = half >= 0
    v0 = np.where(use_row1, lam - y, b)
    v1 = np.where(use_row1, np.conj(b), lam - x)
    norm = np.sqrt(np.abs(v0) ** 2 + np.abs(v1) ** 2)
    degenerate = norm <= 1e-300
    safe = np.where(degenerate, 1.0, norm)
    v0 = np.where(degenerate, 1.0, v0 / safe)
    v1 = np.where(degenerate, 0.0, v1 / safe)
    upper = np.stack([v0, v1], axis=-1)
    lower = np.stack([-np.conj(v1), np.conj(v0)], axis=-1)
    # Degenerate spectrum means a multiple of identity: any basis works, but
    # keep the standard basis so that diagonal inputs give the identity.
    lower = np.where(degenerate[..., None], np.array([1.0, 0.0]), lower)
    upper = np.where(degenerate[..., None], np.array([0.0, 1.0]), upper)
    v = np.stack([lower, upper], axis=-1).astype(complex)
    return w, v


def eig_hermitian(a, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix (or stack).

    Returns ``(w, v)`` with eigenvalues ascending and unitary ``v`` so that
    ``a == v @ diag(w) @ v^dagger``.

    Raises:
        PreconditionError: if ``a`` is not Hermitian and ``check`` is set.
        NumericalError: if LAPACK fails to converge.
    """
    a = _square(a)
    if check and not is_hermitian(a):
        raise PreconditionError("eig_hermitian: matrix is not Hermitian")
    if a.shape[-1] == 2:
        return _eig2(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc
    return w, v


def _rebuild(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return (v * w[..., None, :]) @ _dagger(v)


def _psd_eig(a, what: str) -> tuple[np.ndarray, np.ndarray]:
    w, v = eig_hermitian(a)
    scale = np.maximum(1.0, np.max(np.abs(w), axis=-1, keepdims=True))
    if np.any(w < -PSD_TOL * scale):
        raise NotPSDError(f"{what}: matrix has eigenvalue {np.min(w):.3e} < 0")
    return np.clip(w, 0.0, None), v


def _drop_roundoff(w: np.ndarray) -> np.ndarray:
    # Eigenvalues are only known to ~eps * ||A||; under a square root that
    # noise would become ~1e-8, so treat it as an exact zero.
    floor = ROUNDOFF_FLOOR * np.max(np.abs(w), axis=-1, keepdims=True)
    return np.where(w > floor, w, 0.0)


def matrix_sqrt(a) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix."""
    w, v = _psd_eig(a, "matrix_sqrt")
    return _rebuild(v, np.sqrt(w))


def matrix_invsqrt_pinv(a, rcond: float = PINV_RCOND) -> np.ndarray:
    """Pseudo-inverse square root ``a^{-1/2}`` restricted to the support of ``a``.

    Eigenvalues at or below ``rcond * max eigenvalue`` are treated as zero.
    """
    w, v = _psd_eig(a, "matrix_invsqrt_pinv")
    cutoff = rcond * np.max(w, axis=-1, keepdims=True)
    keep = w > cutoff
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    return _rebuild(v, inv)


def support_projector(a, rcond: float = PINV_RCOND) -> np.ndarray:
    """Orthogonal projector onto the eigenvectors of ``a`` above the pinv cutoff."""
    w, v = _psd_eig(a, "support_projector")
    cutoff = rcond * np.max(w, axis=-1, keepdims=True)
    return _rebuild(v, (w > cutoff).astype(float))


def trace_norm(a) -> float | np.ndarray:
    """Sum of singular values, ``tr sqrt(A^dagger A)``."""
    a = _square(a)
    if is_hermitian(a):
        w, _ = eig_hermitian(a, check=False)
        out = np.sum(np.abs(w), axis=-1)
    else:
        out = np.sum(np.linalg.svd(a, compute_uv=False), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def as_density_matrix(a, tol: float = TRACE_TOL) -> np.ndarray:
    """Validate ``a`` as a density matrix and clamp round-off negative eigenvalues.

    Raises:
        PreconditionError: for non-Hermitian input or trace away from one.
        NotPSDError: for eigenvalues below ``-tol``.
    """
    a = _square(a)
    if not is_hermitian(a):
        raise PreconditionError("density matrix must be Hermitian")
    tr = np.trace(a, axis1=-2, axis2=-1).real
    if np.any(np.abs(tr - 1.0) > tol):
        raise PreconditionError(f"density matrix must have unit trace, got {tr}")
    w, v = eig_hermitian(a, check=False)
    if np.any(w < -tol):
        raise NotPSDError(f"density matrix has eigenvalue {np.min(w):.3e} < 0")
    if np.any(w < 0):
        a = _rebuild(v, np.clip(w, 0.0, None))
    return 0.5 * (a + _dagger(a))


def ket_projector(ket) -> np.ndarray:
    """``|psi><psi|`` for a (not necessarily normalized) state vector."""
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def _check_pair(rho: np.ndarray, sigma: np.ndarray) -> None:
    if rho.shape[-1] != sigma.shape[-1]:
        raise PreconditionError(
            f"dimension mismatch: {rho.shape[-1]} vs {sigma.shape[-1]}"
        )


def fidelity(rho, sigma) -> float | np.ndarray:
    """Uhlmann fidelity ``||sqrt(rho) sqrt(sigma)||_1^2``.

    Works on broadcastable stacks.  ``sigma`` may be subnormalized (the output
    of a trace non-increasing map), in which case the same formula applies.
    """
    rho = _square(rho)
    sigma = _square(sigma)
    _check_pair(rho, sigma)
    w, v = _psd_eig(rho, "fidelity")
    root = _rebuild(v, np.sqrt(_drop_roundoff(w)))
    inner = root @ sigma @ root
    inner = 0.5 * (inner + _dagger(inner))
    w, _ = eig_hermitian(inner, check=False)
    f = np.sum(np.sqrt(_drop_roundoff(w)), axis=-1) ** 2
    f = np.clip(f, 0.0, 1.0)
    return float(f) if np.ndim(f) == 0 else f


def trace_distance(rho, sigma) -> float | np.ndarray:
    """``(1/2) ||rho - sigma||_1``."""
    rho = _square(rho)
    sigma = _square(sigma)
    _check_pair(rho, sigma)
    return 0.5 * trace_norm(rho - sigma)


def relative_entropy(rho, eta) -> float:
    """Quantum relative entropy ``S(rho || eta)`` in bits.

    Returns ``inf`` when the support of ``rho`` is not contained in that of ``eta``.
    """
    rho = _square(rho)
    eta = _square(eta)
    _check_pair(rho, eta)
    wr, _ = _psd_eig(rho, "relative_entropy")
    we, ve = _psd_eig(eta, "relative_entropy")
    cutoff = PINV_RCOND * max(float(np.max(we)), 1e-300)
    on = we > cutoff
    # Overlap of rho with the kernel of eta.
    diag = np.einsum("ji,jk,ki->i", ve.conj(), rho, ve).real
    if np.sum(diag[~on]) > CLAMP_TOL:
        return float("inf")
    pos = wr > CLAMP_TOL
    neg_entropy = float(np.sum(wr[pos] * np.log2(wr[pos])))
    cross = float(np.sum(diag[on] * np.log2(we[on])))
    return max(neg_entropy - cross, 0.0)
