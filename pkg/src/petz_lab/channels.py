"""Completely positive maps in Kraus form and the standard qubit noise models."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from petz_lab.errors import PreconditionError
from petz_lab.matrixcore import _dagger, _square

TP_TOL = 1e-10
EQUAL_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)


@dataclass(frozen=True, eq=False)
class KrausMap:
    """Completely positive map ``omega -> sum_i K_i omega K_i^dagger``.

    No trace-preservation requirement; duals and Petz maps on singular supports
    land here.  ``kraus`` is stored as a read-only array of shape ``(n, d, d)``.
    """

    kraus: np.ndarray
    label: str = field(default="map", compare=False)

    def __post_init__(self):
        ops = _square(np.array(self.kraus, dtype=complex, copy=True))
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise PreconditionError("Kraus list must be a nonempty stack of d x d matrices")
        ops.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return self.kraus.shape[-1]

    def __len__(self) -> int:
        return self.kraus.shape[0]

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __eq__(self, other):
        if not isinstance(other, KrausMap):
            return NotImplemented
        return same_map(self, other)

    __hash__ = None

    def kraus_sum(self) -> np.ndarray:
        """``sum_i K_i^dagger K_i``; the identity for trace-preserving maps."""
        return np.einsum("kji,kjl->il", self.kraus.conj(), self.kraus)

    def is_trace_preserving(self, tol: float = TP_TOL) -> bool:
        return bool(np.max(np.abs(self.kraus_sum() - np.eye(self.dim))) <= tol)

    def is_unital(self, tol: float = TP_TOL) -> bool:
        out = np.einsum("kij,klj->il", self.kraus, self.kraus.conj())
        return bool(np.max(np.abs(out - np.eye(self.dim))) <= tol)


class QuantumChannel(KrausMap):
    """Trace-preserving :class:`KrausMap`; construction fails otherwise."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_trace_preserving():
            err = np.max(np.abs(self.kraus_sum() - np.eye(self.dim)))
            raise PreconditionError(
                f"Kraus operators are not trace preserving (max deviation {err:.2e})"
            )


def as_channel(m: KrausMap, label: str | None = None) -> KrausMap:
    """Promote to :class:`QuantumChannel` when trace preserving, else keep as is."""
    label = m.label if label is None else label
    if m.is_trace_preserving():
        return QuantumChannel(m.kraus, label)
    return KrausMap(m.kraus, label)


def _check_dim(m: KrausMap, rho: np.ndarray) -> None:
    if rho.shape[-1] != m.dim:
        raise PreconditionError(f"map acts on dim {m.dim}, got operator of dim {rho.shape[-1]}")


def apply(m: KrausMap, rho) -> np.ndarray:
    """Apply the map to an operator or a stack of operators ``(..., d, d)``."""
    rho = _square(rho)
    _check_dim(m, rho)
    # Kraus index leads so it broadcasts against any stack shape.
    k = m.kraus.reshape((len(m),) + (1,) * (rho.ndim - 2) + (m.dim, m.dim))
    out = (k @ rho @ _dagger(k)).sum(axis=0)
    return 0.5 * (out + _dagger(out)) if _is_herm_stack(rho) else out


def _is_herm_stack(rho: np.ndarray) -> bool:
    return bool(np.max(np.abs(rho - _dagger(rho)), initial=0.0) <= 1e-12)


def dual(m: KrausMap) -> KrausMap:
    """Trace-dual (Heisenberg picture) map with Kraus operators ``K_i^dagger``."""
    return as_channel(KrausMap(_dagger(m.kraus), f"dual({m.label})"))


def compose(after: KrausMap, before: KrausMap) -> KrausMap:
    """The map ``after o before``; Kraus list is every product ``A_i B_j``."""
    if after.dim != before.dim:
        raise PreconditionError(f"dimension mismatch: {after.dim} vs {before.dim}")
    ops = (after.kraus[:, None] @ before.kraus[None, :]).reshape(-1, after.dim, after.dim)
    out = KrausMap(ops, f"{after.label}*{before.label}")
    if isinstance(after, QuantumChannel) and isinstance(before, QuantumChannel):
        return QuantumChannel(ops, out.label)
    return out


def superoperator(m: KrausMap) -> np.ndarray:
    """Matrix ``S`` with ``vec(m(rho)) = S @ vec(rho)`` under column stacking.

    For column stacking ``vec(A rho B) = (B^T kron A) vec(rho)``, so each Kraus
    term contributes ``conj(K) kron K``.
    """
    return sum(np.kron(k.conj(), k) for k in m.kraus)


def vec(rho) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def same_map(a: KrausMap, b: KrausMap, tol: float = EQUAL_TOL) -> bool:
    """Representation-independent equality, judged on superoperators."""
    if a.dim != b.dim:
        return False
    return bool(np.max(np.abs(superoperator(a) - superoperator(b))) <= tol)


def choi(m: KrausMap) -> np.ndarray:
    """Normalized Choi state ``(1 kron m)(|Omega><Omega|)``, trace one for TP maps."""
    d = m.dim
    omega = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    big = np.stack([np.kron(np.eye(d), k) for k in m.kraus])
    vecs = big @ omega
    return np.einsum("ki,kj->ij", vecs, vecs.conj())


def partial_trace_second(a: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out the second factor of an operator on ``C^d1 kron C^d2``."""
    a = np.asarray(a).reshape(*a.shape[:-2], d1, d2, d1, d2)
    return np.einsum("...ijkj->...ik", a)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise PreconditionError(f"noise strength p must lie in [0, 1], got {p}")
    return p


def identity_channel(dim: int = 2) -> QuantumChannel:
    return QuantumChannel(np.eye(dim, dtype=complex)[None], "identity")


def dephasing(p: float) -> QuantumChannel:
    """``(1 - p/2) rho + (p/2) Z rho Z``; off-diagonals shrink by ``1 - p``."""
    p = _check_p(p)
    return QuantumChannel(
        np.stack([np.sqrt(1 - p / 2) * I2, np.sqrt(p / 2) * Z]), f"dephasing({p:g})"
    )


def depolarizing(p: float) -> QuantumChannel:
    """``(1 - 3p/4) rho + (p/4)(X rho X + Y rho Y + Z rho Z)``; Bloch vector shrinks by ``1 - p``."""
    p = _check_p(p)
    w = np.sqrt(p / 4)
    return QuantumChannel(
        np.stack([np.sqrt(1 - 3 * p / 4) * I2, w * X, w * Y, w * Z]), f"depolarizing({p:g})"
    )


def amplitude_damping(p: float) -> QuantumChannel:
    """Decay ``|1> -> |0>`` with probability ``p``."""
    p = _check_p(p)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return QuantumChannel(np.stack([k0, k1]), f"amplitude_damping({p:g})")


def fully_depolarizing() -> QuantumChannel:
    return QuantumChannel(depolarizing(1.0).kraus, "fully_depolarizing")


CHANNEL_FAMILIES = {
    "dephasing": dephasing,
    "depolarizing": depolarizing,
    "amplitude-damping": amplitude_damping,
}


def to_json(m: KrausMap) -> str:
    """Serialize as ``{"label", "dim", "kraus": [[[re, im], ...], ...]}``.

    Each Kraus operator is written row-major as a flat list of ``[re, im]`` pairs.
    """
    payload = {
        "label": m.label,
        "dim": m.dim,
        "kraus": [[[float(z.real), float(z.imag)] for z in k.reshape(-1)] for k in m.kraus],
    }
    return json.dumps(payload)


def from_json(text: str) -> KrausMap:
    """Inverse of :func:`to_json`; returns a QuantumChannel when trace preserving."""
    try:
        payload = json.loads(text)
        dim = int(payload["dim"])
        ops = np.array(
            [[complex(re, im) for re, im in k] for k in payload["kraus"]], dtype=complex
        ).reshape(-1, dim, dim)
    except (KeyError, TypeError, ValueError) as exc:
        raise PreconditionError(f"malformed channel JSON: {exc}") from exc
    return as_channel(KrausMap(ops, str(payload.get("label", "map"))))
