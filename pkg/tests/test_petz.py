import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from petz_lab.channels import (
    I2,
    QuantumChannel,
    amplitude_damping,
    apply,
    choi,
    compose,
    dephasing,
    depolarizing,
    dual,
    identity_channel,
    same_map,
    superoperator,
)
from petz_lab.errors import PreconditionError
from petz_lab.matrixcore import support_projector, trace_distance
from petz_lab.petz import RecoveryStrategy, ReferenceState, petz_for_reference, petz_map, recover

P_GRID = np.round(np.linspace(0, 1, 11), 12)
Q_GRID = np.round(np.linspace(0, 1, 21), 12)
CONSTRUCTORS = [dephasing, depolarizing, amplitude_damping]


def test_reference_state():
    np.testing.assert_allclose(ReferenceState(0.25).matrix, np.diag([0.75, 0.25]))
    for bad in (-0.01, 1.01):
        with pytest.raises(PreconditionError):
            ReferenceState(bad)


def test_strategy_validation():
    assert str(RecoveryStrategy.petz(0.5)) == "petz(q=0.5)"
    assert str(RecoveryStrategy.identity()) == "identity"
    with pytest.raises(PreconditionError):
        RecoveryStrategy("petz")
    with pytest.raises(PreconditionError):
        RecoveryStrategy("identity", ReferenceState(0.1))
    with pytest.raises(PreconditionError):
        RecoveryStrategy("nearest")


@pytest.mark.parametrize("p", P_GRID)
def test_dephasing_petz_is_q_independent(p):
    target = superoperator(dephasing(p))
    for q in Q_GRID:
        got = superoperator(petz_for_reference(dephasing(p), ReferenceState(q)))
        np.testing.assert_allclose(got, target, atol=1e-10)


def test_petz_of_identity_is_identity(rng):
    for _ in range(20):
        assert same_map(petz_map(identity_channel(), random_state(rng)), identity_channel())


@pytest.mark.parametrize("make", [dephasing, depolarizing])
@pytest.mark.parametrize("p", P_GRID)
def test_unital_shortcut(make, p):
    ch = make(p)
    np.testing.assert_allclose(
        superoperator(petz_map(ch, I2 / 2)), superoperator(dual(ch)), atol=1e-10
    )


@pytest.mark.parametrize("p", P_GRID)
def test_depolarizing_petz_self(p):
    assert same_map(petz_map(depolarizing(p), I2 / 2), depolarizing(p))


def test_dimension_mismatch():
    with pytest.raises(PreconditionError):
        petz_map(dephasing(0.2), np.eye(4) / 4)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(CONSTRUCTORS),
    st.floats(0.0, 0.999),
    st.integers(0, 2**32 - 1),
)
def test_recovers_reference_state(make, p, seed):
    rng = np.random.default_rng(seed)
    ch = make(p)
    sigma = random_state(rng)
    rec = petz_map(ch, sigma)
    assert trace_distance(apply(rec, apply(ch, sigma)), sigma) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(CONSTRUCTORS), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_petz_is_cp_and_tp_on_support(make, p, q):
    ch = make(p)
    sigma = ReferenceState(q).matrix
    rec = petz_for_reference(ch, ReferenceState(q))
    assert np.min(np.linalg.eigvalsh(choi(rec))) > -1e-10
    out = apply(ch, (1 - 1e-10) * sigma + 1e-10 * I2 / 2)
    np.testing.assert_allclose(rec.kraus_sum(), support_projector(out), atol=1e-9)


def test_full_damping_is_flagged_not_renormalized():
    rec = petz_for_reference(amplitude_damping(1.0), ReferenceState(0.3))
    assert not rec.is_trace_preserving()
    assert not isinstance(rec, QuantumChannel)
    np.testing.assert_allclose(rec.kraus_sum(), np.diag([1.0, 0.0]), atol=1e-12)


def test_full_rank_output_gives_channel():
    assert isinstance(petz_for_reference(amplitude_damping(0.5), ReferenceState(0.3)), QuantumChannel)


@pytest.mark.parametrize("make", CONSTRUCTORS)
@pytest.mark.parametrize("q", [0.05, 0.3, 0.5, 0.95])
def test_noiseless_channel_recovers_exactly(make, q, rng):
    ch = make(0.0)
    rec = petz_for_reference(ch, ReferenceState(q))
    for _ in range(50):
        rho = random_state(rng)
        assert trace_distance(apply(rec, apply(ch, rho)), rho) < 1e-9


def test_recover_identity_and_mixed(rng):
    ch = amplitude_damping(0.4)
    out = apply(ch, random_state(rng))
    np.testing.assert_array_equal(recover(RecoveryStrategy.identity(), ch, out), out)
    np.testing.assert_allclose(recover(RecoveryStrategy.maximally_mixed(), ch, out), I2 / 2)
    stack = np.stack([out, out])
    assert recover(RecoveryStrategy.maximally_mixed(), ch, stack).shape == (2, 2, 2)


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_recover_dephasing_applies_it_twice(p, rng):
    ch = dephasing(p)
    twice = compose(ch, ch)
    for _ in range(20):
        rho = random_state(rng)
        got = recover(RecoveryStrategy.petz(0.5), ch, apply(ch, rho))
        np.testing.assert_allclose(got, apply(twice, rho), atol=1e-12)


def test_grid_oracle_runtime():
    start = time.perf_counter()
    for p in P_GRID:
        for q in Q_GRID:
            petz_for_reference(dephasing(p), ReferenceState(q))
    assert time.perf_counter() - start < 1.0
