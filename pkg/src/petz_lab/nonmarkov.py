"""Time-dependent dephasing dynamics and Petz-approximated intermediate maps.

Times are measured in units of ``1/omega``; trajectories report ``omega * t``.
The approximated evolution to the final time ``ratio * t`` replaces the
(generally non-CP) inverse of the map at the intermediate time ``t`` with its
Petz recovery map for the maximally mixed reference state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from petz_lab.channels import (
    QuantumChannel,
    apply,
    choi,
    compose,
    dephasing,
)
from petz_lab.errors import DynamicsError, PreconditionError, QuadratureError
from petz_lab.matrixcore import ket_projector, trace_distance, trace_norm
from petz_lab.petz import petz_map

ALPHA = math.exp(4) / (math.exp(4) - 1)
P_TOL = 1e-12
RISE_TOL = 1e-9
NEG_RATE_TOL = 1e-12
QUAD_TOL = 1e-10
QUAD_MAX_DEPTH = 40

PLUS = ket_projector([1, 1])
MINUS = ket_projector([1, -1])


def p_case1(t: float, omega: float = 1.0):
    """Periodic dephasing probability, reaching 1 at odd multiples of pi/omega."""
    return ALPHA * (1.0 - np.exp(-2.0 * (1.0 - np.cos(omega * np.asarray(t)))))


def p_case2(t: float, omega: float = 1.0):
    """Damped-oscillating dephasing probability that tends to 1."""
    wt = omega * np.asarray(t)
    return 1.0 - np.exp(-0.3 * wt) * np.cos(wt) ** 2


@dataclass(frozen=True)
class DynamicsModel:
    kind: str
    p_of_t: Callable[[float], float]
    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise PreconditionError("omega must be positive")

    @classmethod
    def case1(cls, omega: float = 1.0) -> DynamicsModel:
        return cls("case1", lambda t: p_case1(t, omega), omega)

    @classmethod
    def case2(cls, omega: float = 1.0) -> DynamicsModel:
        return cls("case2", lambda t: p_case2(t, omega), omega)

    @classmethod
    def custom(cls, p_of_t: Callable[[float], float], omega: float = 1.0) -> DynamicsModel:
        return cls("custom", p_of_t, omega)

    @classmethod
    def from_case(cls, case: int, omega: float = 1.0) -> DynamicsModel:
        if case == 1:
            return cls.case1(omega)
        if case == 2:
            return cls.case2(omega)
        raise PreconditionError(f"unknown dynamics case {case!r}")

    def p(self, t: float) -> float:
        """Error probability at time ``t``, clipped after a range check."""
        if t < 0:
            raise PreconditionError("time must be nonnegative")
        value = float(self.p_of_t(t))
        if not -P_TOL <= value <= 1 + P_TOL:
            raise DynamicsError(f"{self.kind}: p({t}) = {value} outside [0, 1]")
        return min(max(value, 0.0), 1.0)


def map_at(model: DynamicsModel, t: float) -> QuantumChannel:
    """The channel from time 0 to ``t``."""
    return dephasing(model.p(t))


def approx_map(model: DynamicsModel, t: float, ratio: float = 2.0) -> QuantumChannel:
    """``Lambda_{ratio t,0} o Petz[Lambda_{t,0}] o Lambda_{t,0}`` with reference I/2."""
    if ratio <= 1:
        raise PreconditionError("ratio of final to intermediate time must exceed 1")
    mid = map_at(model, t)
    recovery = petz_map(mid, np.eye(2) / 2)
    return compose(map_at(model, ratio * t), compose(recovery, mid))


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    value: float


def _grid(t_grid) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) < 0):
        raise PreconditionError("time grid must be nonnegative and ascending")
    return t_grid


def backflow_trajectory(
    model: DynamicsModel, which: str, t_grid, ratio: float = 2.0
) -> list[TrajectoryPoint]:
    """Distinguishability of the evolved |+> and |-> states at the final time."""
    if which not in ("original", "approx"):
        raise PreconditionError(f"which must be 'original' or 'approx', got {which!r}")
    out = []
    for t in _grid(t_grid):
        ch = map_at(model, ratio * t) if which == "original" else approx_map(model, t, ratio)
        value = trace_distance(apply(ch, PLUS), apply(ch, MINUS))
        out.append(TrajectoryPoint(model.omega * t, float(value)))
    return out


def choi_distance_trajectory(model: DynamicsModel, t_grid, ratio: float = 2.0) -> list[TrajectoryPoint]:
    """Half the trace norm between Choi states of the approximated and exact maps."""
    out = []
    for t in _grid(t_grid):
        diff = choi(approx_map(model, t, ratio)) - choi(map_at(model, ratio * t))
        out.append(TrajectoryPoint(model.omega * t, 0.5 * float(trace_norm(diff))))
    return out


def values(points: Sequence[TrajectoryPoint]) -> np.ndarray:
    return np.array([pt.value for pt in points])


def has_backflow(vals: Sequence[float], tol: float = RISE_TOL) -> bool:
    """True if some step increases by more than ``tol``."""
    return bool(np.any(np.diff(np.asarray(vals)) > tol))


def revivals(vals: Sequence[float], tol: float = RISE_TOL) -> list[tuple[int, int, float]]:
    """Rises of a trajectory as ``(i_min, i_max, height)``.

    Each entry runs from a local minimum to the next local maximum; rises
    no larger than ``tol`` are ignored as numerical noise.
    """
    v = np.asarray(vals, dtype=float)
    out = []
    i = 0
    n = len(v)
    while i < n - 1:
        while i < n - 1 and v[i + 1] - v[i] <= tol:
            i += 1
        if i >= n - 1:
            break
        lo = i
        while i < n - 1 and v[i + 1] - v[i] > -tol:
            i += 1
        height = v[i] - v[lo]
        if height > tol:
            out.append((lo, i, float(height)))
    return out


def first_revival_height(vals: Sequence[float]) -> float:
    rises = revivals(vals)
    return rises[0][2] if rises else 0.0


def max_revival_height(vals: Sequence[float]) -> float:
    rises = revivals(vals)
    return max(h for _, _, h in rises) if rises else 0.0


# Time-local generator machinery


@dataclass(frozen=True)
class GeneratorModel:
    """Pauli dephasing generator with rates ``gamma_k(t)``, k = 1, 2, 3.

    ``active_channel`` names the one rate the single-channel formula for
    ``p(t)`` reads; the other two are expected to vanish.
    """

    gamma_k: tuple[Callable[[float], float], Callable[[float], float], Callable[[float], float]]
    active_channel: int = 3

    def __post_init__(self):
        if len(self.gamma_k) != 3:
            raise PreconditionError("need exactly three rate functions")
        if self.active_channel not in (1, 2, 3):
            raise PreconditionError("active_channel must be 1, 2 or 3")

    @classmethod
    def single(cls, rate: Callable[[float], float], k: int = 3) -> GeneratorModel:
        if k not in (1, 2, 3):
            raise PreconditionError("active_channel must be 1, 2 or 3")
        rates = [_zero, _zero, _zero]
        rates[k - 1] = rate
        return cls(tuple(rates), k)

    @property
    def rate(self) -> Callable[[float], float]:
        return self.gamma_k[self.active_channel - 1]


def _zero(t: float) -> float:
    return 0.0


def case2_rate(t: float) -> float:
    """Oscillating rate paired with the damped-oscillating model.

    Has poles where ``exp(0.3 t) = 2 cos^2 t``, the first near t = 0.672, so
    its integral diverges there.
    """
    c, s = math.cos(t), math.sin(t)
    return c * (-0.3 * c - 2.0 * s) / (math.exp(0.3 * t) - 2.0 * c * c)


def generator_for_case(case: int) -> GeneratorModel:
    if case == 1:
        return GeneratorModel.single(math.sin)
    if case == 2:
        return GeneratorModel.single(case2_rate)
    raise PreconditionError(f"unknown dynamics case {case!r}")


def adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, tol: float = QUAD_TOL,
    max_depth: int = QUAD_MAX_DEPTH,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Raises:
        QuadratureError: on a non-finite integrand value or when any branch
            still fails the error test at ``max_depth``.
    """
    if a == b:
        return 0.0

    def ev(x):
        try:
            y = float(f(x))
        except (ZeroDivisionError, OverflowError) as exc:
            raise QuadratureError(f"integrand failed at t = {x}: {exc}") from exc
        if not math.isfinite(y):
            raise QuadratureError(f"integrand is not finite at t = {x}")
        return y

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(lo, hi, fa, fm, fb, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = ev(lm), ev(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise QuadratureError(f"no convergence on [{lo}, {hi}] after {max_depth} bisections")
        return recurse(lo, mid, fa, flm, fm, left, eps / 2, depth + 1) + recurse(
            mid, hi, fm, frm, fb, right, eps / 2, depth + 1
        )

    fa, fm, fb = ev(a), ev(0.5 * (a + b)), ev(b)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


def integrated_rate(gen: GeneratorModel, t: float, quad_tol: float = QUAD_TOL) -> float:
    if quad_tol <= 0:
        raise PreconditionError("quad_tol must be positive")
    return adaptive_simpson(gen.rate, 0.0, float(t), quad_tol)


def gamma_to_probability(gen: GeneratorModel, t: float, quad_tol: float = QUAD_TOL) -> float:
    """Single-channel Pauli probability ``(1 - exp(-2 Gamma(t))) / 2``."""
    return 0.5 * (1.0 - math.exp(-2.0 * integrated_rate(gen, t, quad_tol)))


def markovianity_witness(gen: GeneratorModel, t_grid) -> list[tuple[float, float]]:
    """Grid spans on which some rate is negative (below ``-1e-12``).

    An empty list means every sampled rate is nonnegative.
    """
    t_grid = _grid(t_grid)
    negative = np.zeros(t_grid.size, dtype=bool)
    for rate in gen.gamma_k:
        with np.errstate(all="ignore"):
            vals = np.array([rate(t) for t in t_grid], dtype=float)
        negative |= vals < -NEG_RATE_TOL
    spans = []
    start = None
    for i, neg in enumerate(negative):
        if neg and start is None:
            start = i
        if not neg and start is not None:
            spans.append((float(t_grid[start]), float(t_grid[i - 1])))
            start = None
    if start is not None:
        spans.append((float(t_grid[start]), float(t_grid[-1])))
    return spans
