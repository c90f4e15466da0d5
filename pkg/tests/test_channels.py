import numpy as np
import pytest

from conftest import random_state
from petz_lab.channels import (
    I2,
    KrausMap,
    QuantumChannel,
    X,
    Y,
    Z,
    amplitude_damping,
    apply,
    choi,
    compose,
    dephasing,
    depolarizing,
    dual,
    from_json,
    fully_depolarizing,
    identity_channel,
    partial_trace_second,
    same_map,
    superoperator,
    to_json,
    unvec,
    vec,
)
from petz_lab.errors import PreconditionError
from petz_lab.matrixcore import ket_projector, trace_distance

P_GRID = np.round(np.linspace(0, 1, 21), 12)
ZERO = np.diag([1.0, 0.0]).astype(complex)
ONE = np.diag([0.0, 1.0]).astype(complex)
PLUS = ket_projector([1, 1])
OMEGA = ket_projector([1, 0, 0, 1])
CONSTRUCTORS = [dephasing, depolarizing, amplitude_damping]


def coherence_channel(c):
    """Dephasing written by its off-diagonal factor ``c``."""
    return dephasing(1 - c)


@pytest.mark.parametrize("make", CONSTRUCTORS)
@pytest.mark.parametrize("p", P_GRID)
def test_constructors_are_trace_preserving(make, p):
    ch = make(p)
    np.testing.assert_allclose(ch.kraus_sum(), I2, atol=1e-12)


@pytest.mark.parametrize("make", CONSTRUCTORS)
def test_p_out_of_range(make):
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(PreconditionError):
            make(bad)


def test_quantum_channel_rejects_non_tp():
    with pytest.raises(PreconditionError):
        QuantumChannel(np.stack([I2, I2]))
    KrausMap(np.stack([I2, I2]))  # plain CP map is fine


def test_apply_identity(rng):
    rho = random_state(rng)
    np.testing.assert_allclose(apply(identity_channel(), rho), rho)


def test_full_dephasing_of_plus():
    np.testing.assert_allclose(apply(dephasing(1.0), PLUS), I2 / 2, atol=1e-15)


def test_full_damping_goes_to_ground(rng):
    for _ in range(20):
        np.testing.assert_allclose(apply(amplitude_damping(1.0), random_state(rng)), ZERO, atol=1e-15)


def test_apply_dimension_mismatch():
    with pytest.raises(PreconditionError):
        apply(dephasing(0.1), np.eye(4) / 4)


def test_apply_output_is_state(rng):
    for make in CONSTRUCTORS:
        for p in (0.0, 0.3, 1.0):
            out = apply(make(p), random_state(rng))
            assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(out, out.conj().T, atol=1e-15)
            assert np.min(np.linalg.eigvalsh(out)) > -1e-12


@pytest.mark.parametrize("make", [dephasing, depolarizing])
@pytest.mark.parametrize("p", P_GRID)
def test_unital_channels_are_self_dual(make, p):
    assert same_map(dual(make(p)), make(p))


def test_dual_identity():
    assert same_map(dual(identity_channel()), identity_channel())


def test_dual_of_tp_map_is_unital():
    d = dual(amplitude_damping(0.4))
    assert d.is_unital()
    assert not d.is_trace_preserving()
    assert not isinstance(d, QuantumChannel)


@pytest.mark.parametrize("make", CONSTRUCTORS)
@pytest.mark.parametrize("p", [0.0, 0.2, 0.7, 1.0])
def test_compose_identity_left_unit(make, p):
    assert same_map(compose(identity_channel(), make(p)), make(p))


def test_compose_dephasing_multiplies_coherence():
    for p1, p2 in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.3)]:
        got = compose(dephasing(p1), dephasing(p2))
        assert isinstance(got, QuantumChannel)
        assert same_map(got, coherence_channel((1 - p1) * (1 - p2)))


@pytest.mark.parametrize("make", CONSTRUCTORS)
def test_fully_depolarizing_absorbs(make):
    assert same_map(compose(fully_depolarizing(), make(0.37)), fully_depolarizing())


def test_choi_identity():
    np.testing.assert_allclose(choi(identity_channel()), OMEGA, atol=1e-15)


def test_choi_fully_depolarizing():
    np.testing.assert_allclose(choi(fully_depolarizing()), np.eye(4) / 4, atol=1e-15)


@pytest.mark.parametrize("p", [0.0, 0.25, 0.6, 1.0])
def test_choi_dephasing_scales_coherence_block(p):
    expected = OMEGA.copy()
    expected[0, 3] *= 1 - p
    expected[3, 0] *= 1 - p
    np.testing.assert_allclose(choi(dephasing(p)), expected, atol=1e-15)


@pytest.mark.parametrize("make", CONSTRUCTORS)
@pytest.mark.parametrize("p", P_GRID)
def test_choi_is_state_with_maximally_mixed_marginal(make, p):
    j = choi(make(p))
    np.testing.assert_allclose(j, j.conj().T, atol=1e-15)
    assert np.trace(j).real == pytest.approx(1.0)
    assert np.min(np.linalg.eigvalsh(j)) > -1e-12
    np.testing.assert_allclose(partial_trace_second(j, 2, 2), I2 / 2, atol=1e-15)


def test_superoperator_examples():
    np.testing.assert_allclose(superoperator(identity_channel()), np.eye(4))
    for p in (0.2, 0.8):
        np.testing.assert_allclose(superoperator(dephasing(p)), np.diag([1, 1 - p, 1 - p, 1]), atol=1e-15)


def test_superoperator_is_functorial(rng):
    for _ in range(50):
        a = [dephasing, depolarizing, amplitude_damping][rng.integers(3)](rng.uniform())
        b = [dephasing, depolarizing, amplitude_damping][rng.integers(3)](rng.uniform())
        np.testing.assert_allclose(
            superoperator(compose(a, b)), superoperator(a) @ superoperator(b), atol=1e-12
        )


def test_apply_agrees_with_superoperator(rng):
    for make in CONSTRUCTORS:
        for _ in range(333):
            ch = make(rng.uniform())
            rho = random_state(rng)
            np.testing.assert_allclose(
                unvec(superoperator(ch) @ vec(rho), 2), apply(ch, rho), atol=1e-10
            )


def test_apply_stack_matches_loop(rng):
    ch = amplitude_damping(0.3)
    stack = np.stack([random_state(rng) for _ in range(10)])
    out = apply(ch, stack)
    for o, r in zip(out, stack):
        np.testing.assert_allclose(o, apply(ch, r), atol=1e-15)


@pytest.mark.parametrize("make", [dephasing, depolarizing])
@pytest.mark.parametrize("p", P_GRID)
def test_unital_fixes_maximally_mixed(make, p):
    np.testing.assert_allclose(apply(make(p), I2 / 2), I2 / 2, atol=1e-12)


@pytest.mark.parametrize("p", [p for p in P_GRID if p >= 0.05])
def test_amplitude_damping_not_unital(p):
    # Bloch z shifts by p, so the trace distance from I/2 is p/2.
    assert trace_distance(apply(amplitude_damping(p), I2 / 2), I2 / 2) == pytest.approx(p / 2, abs=1e-10)


def test_depolarizing_examples():
    assert same_map(depolarizing(0.0), identity_channel())
    np.testing.assert_allclose(apply(depolarizing(1.0), PLUS), I2 / 2, atol=1e-15)
    np.testing.assert_allclose(apply(depolarizing(0.5), ZERO), np.diag([0.75, 0.25]), atol=1e-15)


def test_amplitude_damping_examples():
    assert same_map(amplitude_damping(0.0), identity_channel())
    np.testing.assert_allclose(apply(amplitude_damping(0.5), ONE), I2 / 2, atol=1e-15)


def test_dephasing_fixes_diagonal_references():
    for p in P_GRID:
        for q in P_GRID:
            sigma = np.diag([1 - q, q]).astype(complex)
            np.testing.assert_allclose(apply(dephasing(p), sigma), sigma, atol=1e-15)


def test_fully_depolarizing_examples(rng):
    for rho in (ZERO, PLUS, I2 / 2, random_state(rng)):
        np.testing.assert_allclose(apply(fully_depolarizing(), rho), I2 / 2, atol=1e-15)


def test_pauli_matrices():
    for s in (X, Y, Z):
        np.testing.assert_allclose(s @ s, I2)


def test_json_round_trip():
    for ch in (dephasing(0.3), amplitude_damping(0.7), dual(amplitude_damping(0.2))):
        back = from_json(to_json(ch))
        assert same_map(back, ch)
        assert back.label == ch.label
        assert type(back) is type(ch)


def test_json_schema():
    import json

    payload = json.loads(to_json(amplitude_damping(0.25)))
    assert set(payload) == {"label", "dim", "kraus"}
    assert payload["dim"] == 2
    assert payload["kraus"][1][1] == [0.5, 0.0]  # sqrt(p) at row 0, column 1


def test_json_malformed():
    with pytest.raises(PreconditionError):
        from_json('{"dim": 2}')
