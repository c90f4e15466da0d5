"""Petz recovery maps and the fixed recovery strategies they are compared against."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from petz_lab.channels import KrausMap, apply, as_channel
from petz_lab.errors import PreconditionError
from petz_lab.matrixcore import (
    PINV_RCOND,
    _dagger,
    as_density_matrix,
    eig_hermitian,
    matrix_invsqrt_pinv,
    matrix_sqrt,
)

# Mixing weight towards I/d used when the reference state is singular; see petz_map.
SUPPORT_EPS = 1e-10


@dataclass(frozen=True)
class ReferenceState:
    """Diagonal qubit reference state ``(1 - q)|0><0| + q|1><1|``."""

    q: float

    def __post_init__(self):
        if not 0.0 <= float(self.q) <= 1.0:
            raise PreconditionError(f"reference parameter q must lie in [0, 1], got {self.q}")
        object.__setattr__(self, "q", float(self.q))

    @property
    def matrix(self) -> np.ndarray:
        return np.diag([1.0 - self.q, self.q]).astype(complex)


@dataclass(frozen=True)
class RecoveryStrategy:
    """One of ``petz`` (with a reference state), ``identity`` or ``maximally_mixed``."""

    kind: str
    reference: ReferenceState | None = None

    KINDS = ("petz", "identity", "maximally_mixed")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise PreconditionError(f"unknown strategy {self.kind!r}")
        if (self.kind == "petz") != (self.reference is not None):
            raise PreconditionError("exactly the petz strategy carries a reference state")

    @classmethod
    def petz(cls, q: float) -> RecoveryStrategy:
        return cls("petz", ReferenceState(q))

    @classmethod
    def identity(cls) -> RecoveryStrategy:
        return cls("identity")

    @classmethod
    def maximally_mixed(cls) -> RecoveryStrategy:
        return cls("maximally_mixed")

    def __str__(self) -> str:
        if self.kind == "petz":
            return f"petz(q={self.reference.q:g})"
        return self.kind


def _is_singular(sigma: np.ndarray) -> bool:
    w, _ = eig_hermitian(sigma)
    return bool(w[0] <= PINV_RCOND * w[-1])


def petz_map(ch: KrausMap, sigma, support_eps: float = SUPPORT_EPS) -> KrausMap:
    """Petz recovery map of ``ch`` with reference state ``sigma``.

    Built directly in Kraus form, ``K_i^P = sigma^{1/2} K_i^dagger ch(sigma)^{-1/2}``,
    with the inverse square root taken on the support of ``ch(sigma)``.

    A singular ``sigma`` is replaced by ``(1 - eps) sigma + eps I/d``, which
    evaluates the map as the limit of the full-rank family approaching
    ``sigma`` (up to O(eps)).  Only a genuinely singular ``ch(sigma)``
    (for example full amplitude damping) then leaves the map trace
    non-increasing; such outputs are returned unnormalized.

    Returns:
        A :class:`QuantumChannel` when the result is trace preserving,
        otherwise a plain :class:`KrausMap`.
    """
    sigma = as_density_matrix(sigma)
    if sigma.shape[-1] != ch.dim:
        raise PreconditionError(f"reference state dim {sigma.shape[-1]} vs channel dim {ch.dim}")
    if support_eps > 0 and _is_singular(sigma):
        d = ch.dim
        sigma = (1.0 - support_eps) * sigma + support_eps * np.eye(d) / d
    root = matrix_sqrt(sigma)
    inv_root = matrix_invsqrt_pinv(apply(ch, sigma))
    ops = root @ _dagger(ch.kraus) @ inv_root
    return as_channel(KrausMap(ops, f"petz[{ch.label}]"))


def petz_for_reference(ch: KrausMap, ref: ReferenceState) -> KrausMap:
    return petz_map(ch, ref.matrix)


def recover(strategy: RecoveryStrategy, ch: KrausMap, rho_out) -> np.ndarray:
    """Apply a recovery strategy to channel output(s) ``rho_out``."""
    rho_out = np.asarray(rho_out, dtype=complex)
    if strategy.kind == "identity":
        return rho_out
    if strategy.kind == "maximally_mixed":
        d = rho_out.shape[-1]
        return np.broadcast_to(np.eye(d, dtype=complex) / d, rho_out.shape).copy()
    return apply(petz_for_reference(ch, strategy.reference), rho_out)
