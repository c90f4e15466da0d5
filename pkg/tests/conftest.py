import numpy as np
import pytest

ACCEPTANCE_LINES = []


def random_state(rng, dim=2, rank=None):
    """Random density matrix from a Ginibre matrix (test-side generator)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim=2):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


def qubit_fidelity_closed_form(rho, sigma):
    """tr(rho sigma) + 2 sqrt(det rho det sigma), valid for 2x2 PSD pairs."""
    dr = max(np.linalg.det(rho).real, 0.0)
    ds = max(np.linalg.det(sigma).real, 0.0)
    return np.trace(rho @ sigma).real + 2.0 * np.sqrt(dr * ds)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
