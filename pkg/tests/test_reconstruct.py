import numpy as np
import pytest

from riccocut.ansatz import RiccoAnsatz
from riccocut.circuits import Circuit, GateOp
from riccocut.cutting import CutError, CutSpec, fragment, insert_ricco, random_benchmark, unentangled_benchmark
from riccocut.pauli import Observable
from riccocut.reconstruct import (
    ExecutionLedger,
    leakage,
    qcut_circuit_count,
    qcut_expectation,
    ricco_circuit_count,
    ricco_expectation,
    uncut_expectation,
)
from riccocut.sim import partial_trace, simulate


def observable_all_z(n):
    return Observable.single("Z" * n)


def test_uncut_oracle_basics():
    assert uncut_expectation(Circuit(3), "ZZZ") == pytest.approx(1.0)
    bell = Circuit(2, [GateOp("H", (0,)), GateOp("CNOT", (0, 1))])
    assert uncut_expectation(bell, "ZZ") == pytest.approx(1.0)


def test_uncut_oracle_linearity():
    circuit, _ = random_benchmark(1, seed=11)
    obs = Observable([(0.5, "ZZIIIII"), (0.25, "XIIIIII")])
    direct = uncut_expectation(circuit, obs)
    by_terms = 0.5 * uncut_expectation(circuit, "ZZIIIII") + 0.25 * uncut_expectation(
        circuit, "XIIIIII"
    )
    assert direct == pytest.approx(by_terms, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def test_qcut_matches_uncut_on_benchmarks(k):
    for seed in range(8):
        circuit, cut = random_benchmark(k, seed)
        obs = observable_all_z(circuit.n_wires)
        ref = uncut_expectation(circuit, obs)
        res = qcut_expectation(fragment(circuit, cut), obs)
        assert abs(res.value - ref) <= 1e-9


def test_qcut_handles_xy_observables():
    circuit, cut = random_benchmark(1, seed=4)
    obs = Observable([(0.7, "XYZIZYX"), (-0.2, "IIZZIII")])
    ref = uncut_expectation(circuit, obs)
    res = qcut_expectation(fragment(circuit, cut), obs)
    assert abs(res.value - ref) <= 1e-9


def test_ledger_counts():
    for k, (qc, rc) in {1: (7, 3), 2: (25, 5)}.items():
        assert qcut_circuit_count(k) == qc
        assert ricco_circuit_count(k) == rc
        circuit, cut = random_benchmark(k, seed=0)
        frags = fragment(circuit, cut)
        obs = observable_all_z(circuit.n_wires)
        assert qcut_expectation(frags, obs).ledger.distinct_circuits == qc
        ansatz = RiccoAnsatz(k)
        with_u = insert_ricco(frags, ansatz)
        theta = np.zeros(ansatz.param_count)
        assert ricco_expectation(with_u, theta, obs).ledger.distinct_circuits == rc


def test_ledger_formula_through_k4():
    assert [qcut_circuit_count(k) for k in (1, 2, 3, 4)] == [7, 25, 91, 337]
    assert [ricco_circuit_count(k) for k in (1, 2, 3, 4)] == [3, 5, 9, 17]


def test_ledger_merge_and_validation():
    a = ExecutionLedger(3, 100, "reconstruction")
    b = ExecutionLedger(4, 50, "reconstruction")
    m = a.merge(b)
    assert (m.distinct_circuits, m.shots_total) == (7, 150)
    with pytest.raises(ValueError):
        a.merge(ExecutionLedger(phase="optimization"))
    with pytest.raises(ValueError):
        a.add(-1)


def test_qcut_invariant_under_inserted_rotation():
    rng = np.random.default_rng(0)
    for k in (1, 2):
        circuit, cut = random_benchmark(k, seed=17)
        obs = observable_all_z(circuit.n_wires)
        ref = uncut_expectation(circuit, obs)
        ansatz = RiccoAnsatz(k)
        frags = insert_ricco(fragment(circuit, cut), ansatz)
        theta = rng.uniform(0, 2 * np.pi, ansatz.param_count)
        res = qcut_expectation(frags, obs, bindings=ansatz.bindings(theta))
        assert abs(res.value - ref) <= 1e-9


def _aligning_theta(frags):
    """ROT angles sending the (pure, 1-qubit) cut state to |0>."""
    state = simulate(frags.upstream)
    rho = partial_trace(state, keep=frags.cut_up_locals)
    w, v = np.linalg.eigh(rho.data)
    psi = v[:, np.argmax(w)]
    phi = np.angle(psi[0]) - np.angle(psi[1])
    chi = 2 * np.arctan2(abs(psi[1]), abs(psi[0]))
    return np.array([phi, -chi, 0.0])


def test_ricco_exact_for_unentangled_cut_with_analytic_rotation():
    for seed in range(5):
        circuit, cut = unentangled_benchmark(1, seed)
        obs = observable_all_z(circuit.n_wires)
        ref = uncut_expectation(circuit, obs)
        plain = fragment(circuit, cut)
        theta = _aligning_theta(plain)
        frags = insert_ricco(plain, RiccoAnsatz(1))
        res = ricco_expectation(frags, theta, obs)
        assert abs(res.value - ref) <= 1e-10
        assert leakage(frags, theta, obs) <= 1e-10


def test_ricco_bias_bounded_by_leakage():
    rng = np.random.default_rng(5)
    for k in (1, 2):
        for seed in range(4):
            circuit, cut = random_benchmark(k, seed)
            obs = observable_all_z(circuit.n_wires)
            ansatz = RiccoAnsatz(k)
            frags = insert_ricco(fragment(circuit, cut), ansatz)
            theta = rng.uniform(0, 2 * np.pi, ansatz.param_count)
            q = qcut_expectation(frags, obs, bindings=ansatz.bindings(theta))
            r = ricco_expectation(frags, theta, obs)
            bound = leakage(frags, theta, obs)
            assert abs(r.value - q.value) <= bound + 1e-9


def test_leakage_on_plus_cut_state():
    # H | cut | H on one wire: the cut state is |+>, and with theta = 0 the
    # omitted contributions are exactly (|up(X)down(X)| + |up(Y)down(Y)|) / 2,
    # which here is (1 * 2) / 2 = 1 (all the signal flows through X).
    circuit = Circuit(1, [GateOp("H", (0,)), GateOp("H", (0,))])
    cut = CutSpec(1, (0,))
    frags = insert_ricco(fragment(circuit, cut), RiccoAnsatz(1))
    theta = np.zeros(3)
    obs = Observable.single("Z")
    res = qcut_expectation(frags, obs, bindings=frags.ansatz.bindings(theta))
    contributions = {p: up * down for _, p, up, down in res.per_term}
    expected = (abs(contributions["X"]) + abs(contributions["Y"])) / 2
    lk = leakage(frags, theta, obs)
    assert lk == pytest.approx(expected, abs=1e-12)
    assert lk == pytest.approx(1.0, abs=1e-12)
    # the diagonal-only value really is off by the leakage here
    r = ricco_expectation(frags, theta, obs)
    assert abs(r.value - res.value) == pytest.approx(1.0, abs=1e-12)


def test_value_bounded_by_coefficient_norm():
    circuit, cut = random_benchmark(1, seed=9)
    obs = Observable([(0.5, "Z" * 7), (0.25, "X" + "I" * 6)])
    res = qcut_expectation(fragment(circuit, cut), obs)
    assert abs(res.value) <= 0.75 + 1e-9


def test_identity_terms_bypass_execution():
    circuit, cut = random_benchmark(1, seed=2)
    frags = fragment(circuit, cut)
    pure_identity = Observable.single("I" * 7, coeff=2.5)
    res = qcut_expectation(frags, pure_identity)
    assert res.value == pytest.approx(2.5)
    assert res.ledger.distinct_circuits == 0
    mixed = Observable([(2.5, "I" * 7), (1.0, "Z" * 7)])
    res = qcut_expectation(frags, mixed)
    assert res.ledger.distinct_circuits == 7


def test_result_json_schema():
    circuit, cut = random_benchmark(1, seed=0)
    res = qcut_expectation(fragment(circuit, cut), observable_all_z(7))
    doc = res.to_json_dict()
    assert set(doc) == {"method", "value", "distinct_circuits", "shots_total", "terms"}
    assert doc["method"] == "qcut" and doc["shots_total"] == 0
    assert {frozenset(t) for t in doc["terms"]} == {frozenset({"cut_pauli", "up", "down"})}
    assert len(doc["terms"]) == 4


def test_ricco_requires_ansatz():
    circuit, cut = random_benchmark(1, seed=0)
    frags = fragment(circuit, cut)
    with pytest.raises(CutError):
        ricco_expectation(frags, np.zeros(3), observable_all_z(7))


def test_shots_mode_converges_to_exact():
    circuit, cut = random_benchmark(1, seed=1)
    obs = observable_all_z(7)
    frags = fragment(circuit, cut)
    exact = qcut_expectation(frags, obs)
    sampled = qcut_expectation(frags, obs, mode="shots", shots=10**6, seed=123)
    assert abs(sampled.value - exact.value) <= 1e-2
    assert sampled.ledger.shots_total == 7 * 10**6

    ansatz = RiccoAnsatz(1)
    with_u = insert_ricco(frags, ansatz)
    theta = np.random.default_rng(3).uniform(0, 2 * np.pi, 3)
    exact_r = ricco_expectation(with_u, theta, obs)
    sampled_r = ricco_expectation(with_u, theta, obs, mode="shots", shots=10**6, seed=5)
    assert abs(sampled_r.value - exact_r.value) <= 1e-2
    assert sampled_r.ledger.distinct_circuits == 3


def test_shots_mode_deterministic_given_seed():
    circuit, cut = random_benchmark(1, seed=1)
    frags = fragment(circuit, cut)
    a = qcut_expectation(frags, observable_all_z(7), mode="shots", shots=2000, seed=7)
    b = qcut_expectation(frags, observable_all_z(7), mode="shots", shots=2000, seed=7)
    assert a.value == b.value
