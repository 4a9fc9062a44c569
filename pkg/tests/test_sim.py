import numpy as np
import pytest

from riccocut.circuits import Circuit, CircuitError, GateOp, ParamRef, adjoint_ops
from riccocut.cutting import haar_unitary
from riccocut.sim import (
    StateVector,
    apply_ops,
    evolve_operator,
    ops_to_matrix,
    outcome_distribution,
    partial_trace,
    sample_counts,
    simulate,
)


def bell_state():
    c = Circuit(2, [GateOp("H", (0,)), GateOp("CNOT", (0, 1))])
    return simulate(c).data


def test_empty_circuit():
    out = simulate(Circuit(2))
    assert np.allclose(out.data, [1, 0, 0, 0])


def test_hadamard():
    out = simulate(Circuit(1, [GateOp("H", (0,))]))
    assert np.allclose(out.data, [1, 1] / np.sqrt(2))


def test_rot_zero_is_identity():
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    psi /= np.linalg.norm(psi)
    out = apply_ops(psi, 1, [GateOp("ROT", (0,), (0.0, 0.0, 0.0))])
    assert np.allclose(out, psi, atol=1e-12)


def test_unbound_parameter_raises():
    c = Circuit(1, [GateOp("RX", (0,), (ParamRef("a"),))])
    with pytest.raises(CircuitError):
        simulate(c)
    simulate(c, {"a": 0.3})


def test_wire_out_of_range():
    with pytest.raises(CircuitError):
        Circuit(1, [GateOp("H", (1,))])


def test_wire_ordering_msb():
    # X on wire 0 of two flips the most significant bit: |00> -> |10> = index 2
    out = simulate(Circuit(2, [GateOp("X", (0,))]))
    assert out.data[0b10] == pytest.approx(1)


def test_cnot_control_target():
    out = simulate(Circuit(2, [GateOp("X", (0,)), GateOp("CNOT", (0, 1))]))
    assert out.data[0b11] == pytest.approx(1)


def test_state_norm_preserved_random_circuits():
    rng = np.random.default_rng(5)
    for _ in range(10):
        ops = [
            GateOp("U", (0, 1), (), haar_unitary(4, rng)),
            GateOp("RX", (2,), (rng.uniform(0, 2 * np.pi),)),
            GateOp("CNOT", (1, 2)),
            GateOp("ROT", (0,), tuple(rng.uniform(0, 2 * np.pi, 3))),
        ]
        out = simulate(Circuit(3, ops))
        assert np.linalg.norm(out.data) == pytest.approx(1.0, abs=1e-10)


def test_gate_then_adjoint_restores():
    rng = np.random.default_rng(6)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    gates = [
        GateOp("ROT", (1,), (0.3, -1.2, 2.2)),
        GateOp("RXX", (0, 2), (0.7,)),
        GateOp("S", (2,)),
        GateOp("U", (0, 1), (), haar_unitary(4, rng)),
        GateOp("CNOT", (2, 0)),
    ]
    out = apply_ops(psi, 3, gates)
    back = apply_ops(out, 3, adjoint_ops(gates))
    assert np.abs(back - psi).max() <= 1e-12


def test_simulate_linear_in_initial_state():
    rng = np.random.default_rng(7)
    ops = [GateOp("H", (0,)), GateOp("CNOT", (0, 1)), GateOp("RY", (1,), (0.4,))]
    a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    b = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lhs = apply_ops(0.3 * a + 0.7j * b, 2, ops)
    rhs = 0.3 * apply_ops(a, 2, ops) + 0.7j * apply_ops(b, 2, ops)
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_partial_trace_bell():
    rho = partial_trace(bell_state(), keep=[0])
    assert np.allclose(rho.data, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_product_state():
    psi = np.kron([1, 0], [1, 1] / np.sqrt(2)).astype(complex)
    rho = partial_trace(psi, keep=[1])
    assert np.allclose(rho.data, np.full((2, 2), 0.5), atol=1e-12)
    assert rho.purity() == pytest.approx(1.0)


def test_partial_trace_ghz():
    c = Circuit(3, [GateOp("H", (0,)), GateOp("CNOT", (0, 1)), GateOp("CNOT", (1, 2))])
    rho = partial_trace(simulate(c), keep=[0])
    assert np.allclose(rho.data, np.diag([0.5, 0.5]), atol=1e-12)


def test_partial_trace_empty_keep():
    with pytest.raises(ValueError):
        partial_trace(bell_state(), keep=[])


def test_partial_trace_of_pure_state_rank_one():
    rng = np.random.default_rng(8)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    rho = partial_trace(psi, keep=[0, 1, 2])
    eigs = np.linalg.eigvalsh(rho.data)
    assert eigs[-1] == pytest.approx(1.0, abs=1e-10)
    assert np.trace(rho.data).real == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_density_input_matches_vector_input():
    rng = np.random.default_rng(9)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    rho_full = np.outer(psi, psi.conj())
    a = partial_trace(psi, keep=[1, 2]).data
    b = partial_trace(rho_full, keep=[1, 2]).data
    assert np.abs(a - b).max() <= 1e-12


def test_outcome_distribution_basics():
    assert np.allclose(outcome_distribution(np.array([1, 0, 0, 0], dtype=complex)), [1, 0, 0, 0])
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    assert np.allclose(outcome_distribution(plus, [0]), [0.5, 0.5])


def test_outcome_distribution_matches_partial_trace_diagonal():
    rng = np.random.default_rng(10)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    marg = outcome_distribution(psi, [1])
    diag = np.diagonal(partial_trace(psi, keep=[1]).data).real
    assert np.abs(marg - diag).max() <= 1e-12
    assert marg.sum() == pytest.approx(1.0, abs=1e-12)


def test_sample_counts_deterministic_outcome():
    counts = sample_counts(np.array([1.0, 0.0]), shots=1000, seed=0)
    assert counts.tolist() == [1000, 0]


def test_sample_counts_law_of_large_numbers():
    counts = sample_counts(np.array([0.5, 0.5]), shots=10**6, seed=42)
    freqs = counts / 10**6
    assert np.abs(freqs - 0.5).max() <= 5e-3


def test_sample_counts_seed_reproducible():
    a = sample_counts(np.array([0.3, 0.2, 0.5]), shots=5000, seed=9)
    b = sample_counts(np.array([0.3, 0.2, 0.5]), shots=5000, seed=9)
    assert a.tolist() == b.tolist()
    assert a.sum() == 5000


def test_sample_counts_rejects_zero_shots():
    with pytest.raises(ValueError):
        sample_counts(np.array([1.0]), shots=0, seed=0)


def test_evolve_operator_matches_matrix_conjugation():
    rng = np.random.default_rng(11)
    ops = [
        GateOp("U", (0, 1), (), haar_unitary(4, rng)),
        GateOp("RZ", (2,), (0.8,)),
        GateOp("CNOT", (0, 2)),
    ]
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    full = ops_to_matrix(3, ops)
    expected = full @ m @ full.conj().T
    assert np.abs(evolve_operator(m, 3, ops) - expected).max() <= 1e-10


def test_ops_to_matrix_unitary():
    ops = [GateOp("H", (0,)), GateOp("CNOT", (0, 1)), GateOp("RYY", (0, 1), (0.3,))]
    u = ops_to_matrix(2, ops)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_statevector_wrap_validation():
    with pytest.raises(ValueError):
        StateVector.wrap(np.array([1.0, 1.0]))
