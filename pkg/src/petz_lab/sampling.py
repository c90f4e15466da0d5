"""Monte Carlo estimation of average recovery fidelity over random mixed qubits.

Input states come from Haar-random two-qubit pure states with the second
qubit traced out (the Hilbert-Schmidt ensemble).  Sample ``k`` always draws
from its own stream keyed by ``(seed, k)`` and work is split into blocks of
fixed size, so results are bit-identical for any thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from petz_lab.channels import KrausMap, apply, partial_trace_second
from petz_lab.errors import PreconditionError
from petz_lab.matrixcore import fidelity
from petz_lab.petz import RecoveryStrategy, ReferenceState, petz_for_reference, recover

BLOCK_SIZE = 1024
THREADS_ENV = "PETZ_LAB_THREADS"
TIE_TOL = 1e-12


@dataclass(frozen=True)
class SampleConfig:
    n_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if int(self.n_samples) < 1:
            raise PreconditionError("n_samples must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise PreconditionError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class FidelityEstimate:
    mean: float
    variance: float
    n: int

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.n)


def thread_count() -> int:
    """Worker threads for Monte Carlo loops, capped by ``PETZ_LAB_THREADS``."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise PreconditionError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return min(4, os.cpu_count() or 1)


def sample_stream(seed: int, k: int) -> np.random.Generator:
    """Independent generator for sample ``k``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(k,))))


def random_mixed_qubit(rng: np.random.Generator) -> np.ndarray:
    """One Hilbert-Schmidt random qubit state from a seeded generator."""
    while True:
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        norm = np.linalg.norm(psi)
        if norm >= 1e-100:
            break
    psi = psi / norm
    rho = partial_trace_second(np.outer(psi, psi.conj()), 2, 2)
    return 0.5 * (rho + rho.conj().T)


def _blocks(n: int) -> list[tuple[int, int]]:
    return [(a, min(a + BLOCK_SIZE, n)) for a in range(0, n, BLOCK_SIZE)]


def run_blocked(func: Callable[[int, int], np.ndarray], n: int, threads: int | None = None) -> np.ndarray:
    """Evaluate ``func(start, stop)`` over fixed blocks of ``range(n)`` and concatenate in order."""
    blocks = _blocks(n)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(blocks) == 1:
        parts = [func(a, b) for a, b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: func(*ab), blocks))
    return np.concatenate(parts)


def generate_states(seed: int, n: int, threads: int | None = None) -> np.ndarray:
    """States ``0 .. n-1`` of the ensemble keyed by ``seed``."""

    def block(a, b):
        return np.stack([random_mixed_qubit(sample_stream(seed, k)) for k in range(a, b)])

    return run_blocked(block, n, threads)


@lru_cache(maxsize=8)
def _cached_states(seed: int, n: int) -> np.ndarray:
    states = generate_states(seed, n)
    states.setflags(write=False)
    return states


def sample_states(cfg: SampleConfig, threads: int | None = None) -> np.ndarray:
    """The ``(n_samples, 2, 2)`` input ensemble for ``cfg``; read-only and cached.

    The ensemble does not depend on the thread count, so the cache ignores it.
    """
    return _cached_states(int(cfg.seed), int(cfg.n_samples))


def summarize(values: Sequence[float]) -> FidelityEstimate:
    """Mean and population variance with exactly rounded (order-free) sums."""
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = math.fsum(values) / n
    variance = math.fsum((values - mean) ** 2) / n
    return FidelityEstimate(mean, variance, n)


def per_sample_fidelities(
    ch: KrausMap, strategy: RecoveryStrategy, states: np.ndarray, threads: int | None = None
) -> np.ndarray:
    """``F(rho_k, recover(strategy, ch, ch(rho_k)))`` for every input state."""
    if strategy.kind == "petz":
        rec = petz_for_reference(ch, strategy.reference)

        def recovered(out):
            return apply(rec, out)
    else:
        def recovered(out):
            return recover(strategy, ch, out)

    def block(a, b):
        rho = states[a:b]
        return fidelity(rho, recovered(apply(ch, rho)))

    return run_blocked(block, len(states), threads)


def mean_fidelity(
    ch: KrausMap, strategy: RecoveryStrategy, cfg: SampleConfig, threads: int | None = None
) -> FidelityEstimate:
    """Monte Carlo estimate of the average recovery fidelity over the input ensemble."""
    states = sample_states(cfg, threads)
    return summarize(per_sample_fidelities(ch, strategy, states, threads))


@dataclass(frozen=True)
class SweepRow:
    p: float
    q: float
    mean: float
    variance: float
    stderr: float
    is_optimal: bool
    trace_preserving: bool = True


@dataclass
class SweepResult:
    """Grid of estimates over (p, q) with the best q for each p."""

    p_grid: np.ndarray
    q_grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    n: int
    trace_preserving: np.ndarray
    q_star_index: np.ndarray = field(init=False)

    def __post_init__(self):
        self.q_star_index = np.array([best_index(row) for row in self.mean])

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.variance / self.n)

    def q_star(self, p: float) -> float:
        i = int(np.argmin(np.abs(self.p_grid - p)))
        return float(self.q_grid[self.q_star_index[i]])

    def rows(self) -> list[SweepRow]:
        out = []
        for i, p in enumerate(self.p_grid):
            for j, q in enumerate(self.q_grid):
                out.append(
                    SweepRow(
                        float(p), float(q), float(self.mean[i, j]), float(self.variance[i, j]),
                        float(self.stderr[i, j]), j == self.q_star_index[i],
                        bool(self.trace_preserving[i, j]),
                    )
                )
        return out

    def flagged(self) -> list[tuple[float, float]]:
        """(p, q) cells whose Petz map is only trace non-increasing."""
        return [
            (float(self.p_grid[i]), float(self.q_grid[j]))
            for i, j in zip(*np.nonzero(~self.trace_preserving))
        ]


def best_index(means: Sequence[float], tol: float = TIE_TOL) -> int:
    """Index of the maximum; near-ties within ``tol`` go to the smallest index."""
    means = np.asarray(means)
    return int(np.flatnonzero(means >= np.max(means) - tol)[0])


def _check_grid(grid, name: str) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise PreconditionError(f"{name} grid is empty")
    if np.any((grid < 0) | (grid > 1)) or np.any(np.isnan(grid)):
        raise PreconditionError(f"{name} grid values must lie in [0, 1]")
    return grid


def sweep_reference(
    family: Callable[[float], KrausMap],
    p_grid,
    q_grid,
    cfg: SampleConfig,
    threads: int | None = None,
) -> SweepResult:
    """Estimate the Petz recovery fidelity on every (p, q) cell.

    All cells share one sample set, so differences along q are paired.
    """
    p_grid = _check_grid(p_grid, "p")
    q_grid = _check_grid(q_grid, "q")
    states = sample_states(cfg, threads)
    mean = np.empty((p_grid.size, q_grid.size))
    var = np.empty_like(mean)
    tp = np.ones(mean.shape, dtype=bool)
    for i, p in enumerate(p_grid):
        ch = family(p)
        outputs = run_blocked(lambda a, b: apply(ch, states[a:b]), len(states), threads)
        for j, q in enumerate(q_grid):
            rec = petz_for_reference(ch, ReferenceState(q))
            tp[i, j] = rec.is_trace_preserving()
            f = run_blocked(
                lambda a, b: fidelity(states[a:b], apply(rec, outputs[a:b])), len(states), threads
            )
            est = summarize(f)
            mean[i, j], var[i, j] = est.mean, est.variance
    return SweepResult(p_grid, q_grid, mean, var, len(states), tp)


@dataclass(frozen=True)
class StrategyRow:
    p: float
    strategy: str
    estimate: FidelityEstimate
    q_star: float | None = None


STRATEGY_NAMES = ("identity", "petz_optimal", "maximally_mixed")


def compare_strategies(
    family: Callable[[float], KrausMap],
    p_grid,
    q_grid,
    cfg: SampleConfig,
    threads: int | None = None,
    sweep: SweepResult | None = None,
) -> list[StrategyRow]:
    """Identity, best-q Petz and constant I/2 recovery at every noise strength.

    The Petz reference for each p is the sweep's q*, computed on the same
    samples unless ``sweep`` is supplied.
    """
    if sweep is None:
        sweep = sweep_reference(family, p_grid, q_grid, cfg, threads)
    states = sample_states(cfg, threads)
    rows = []
    for i, p in enumerate(sweep.p_grid):
        ch = family(p)
        q_star = float(sweep.q_grid[sweep.q_star_index[i]])
        picks = {
            "identity": RecoveryStrategy.identity(),
            "petz_optimal": RecoveryStrategy.petz(q_star),
            "maximally_mixed": RecoveryStrategy.maximally_mixed(),
        }
        for name in STRATEGY_NAMES:
            est = summarize(per_sample_fidelities(ch, picks[name], states, threads))
            rows.append(StrategyRow(float(p), name, est, q_star if name == "petz_optimal" else None))
    return rows
