"""Reconstruction of uncut expectation values from fragment executions.

Both backends recombine an upstream factor and a downstream factor per cut
Pauli P:

    value = (1/2**k) * sum_P up(P) * down(P)

where up(P) is the expectation of the observable's upstream part tensored
with P on the cut wires, and down(P) feeds P into the downstream fragment's
preparation wires. `qcut` sums over the full basis {I,X,Y,Z}**k and is exact;
`ricco` keeps only the diagonal strings {I,Z}**k, which a single upstream
computational-basis setting can measure once a cut rotation has been
optimized. The omitted terms are the method's bias; `leakage` bounds it.

Exact mode computes expectations from statevectors and feeds Pauli matrices
through a linear-operator path downstream. Shots mode only ever runs
hardware-realizable circuits: rotated measurements upstream and the
preparation states {|0>, |1>, |+>, |+i>} downstream, with the standard
recombination I = r0 + r1, Z = r0 - r1, X = 2r+ - r0 - r1, Y = 2ri - r0 - r1.

Execution ledgers count the distinct circuit variants the protocol submits
per observable group (3**k + 4**k for qcut, 1 + 2**k for ricco) in both
modes; exact mode reports shots_total = 0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuits import Circuit, CircuitError, GateOp
from .cutting import CutError, FragmentPair
from .pauli import MAX_DENSE_QUBITS, Observable, PauliError, PauliString, PAULI_1Q, expectation, measurement_rotation
from .sim import evolve_operator, outcome_distribution, sample_counts, simulate

PREP_GATES: dict[str, tuple[str, ...]] = {
    "0": (),
    "1": ("X",),
    "+": ("H",),
    "i": ("H", "S"),
}

# letter -> {prep label: recombination coefficient}
PREP_COEFFS: dict[str, dict[str, float]] = {
    "I": {"0": 1.0, "1": 1.0},
    "Z": {"0": 1.0, "1": -1.0},
    "X": {"+": 2.0, "0": -1.0, "1": -1.0},
    "Y": {"i": 2.0, "0": -1.0, "1": -1.0},
}

PREP_STATES: dict[str, np.ndarray] = {
    "0": np.array([[1, 0], [0, 0]], dtype=complex),
    "1": np.array([[0, 0], [0, 1]], dtype=complex),
    "+": np.array([[1, 1], [1, 1]], dtype=complex) / 2,
    "i": np.array([[1, -1j], [1j, 1]], dtype=complex) / 2,
}


@dataclass
class ExecutionLedger:
    """Counts of circuit variants and shots, tagged by workflow phase."""

    distinct_circuits: int = 0
    shots_total: int = 0
    phase: str = "reconstruction"

    def add(self, circuits: int, shots: int = 0) -> None:
        if circuits < 0 or shots < 0:
            raise ValueError("ledger counts must be nonnegative")
        self.distinct_circuits += circuits
        self.shots_total += shots

    def merge(self, other: "ExecutionLedger") -> "ExecutionLedger":
        if other.phase != self.phase:
            raise ValueError(f"cannot merge phases {self.phase!r} and {other.phase!r}")
        return ExecutionLedger(
            self.distinct_circuits + other.distinct_circuits,
            self.shots_total + other.shots_total,
            self.phase,
        )


@dataclass
class ReconstructionResult:
    value: float
    ledger: ExecutionLedger
    method: str
    per_term: tuple[tuple[str, str, float, float], ...] = ()
    """(observable term, cut Pauli, upstream factor, downstream factor) records."""

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "distinct_circuits": self.ledger.distinct_circuits,
            "shots_total": self.ledger.shots_total,
            "terms": [
                {"cut_pauli": cut_p, "up": up, "down": down}
                for _, cut_p, up, down in self.per_term
            ],
        }


def qcut_circuit_count(k: int) -> int:
    """Distinct circuit variants per observable group for the full-basis method."""
    if k > 4:
        raise CutError("circuit-count formula pinned for k <= 4")
    return 3**k + 4**k


def ricco_circuit_count(k: int) -> int:
    """Distinct circuit variants per observable group for the diagonal method."""
    if k > 4:
        raise CutError("circuit-count formula pinned for k <= 4")
    return 1 + 2**k


def uncut_expectation(circuit: Circuit, observable: Observable | PauliString | str, bindings=None) -> float:
    """Exact <observable> on the simulated uncut circuit (the oracle)."""
    if circuit.n_wires > MAX_DENSE_QUBITS:
        raise CircuitError(f"uncut oracle limited to {MAX_DENSE_QUBITS} qubits")
    obs = _as_observable(observable, circuit.n_wires)
    state = simulate(circuit, bindings)
    return obs.expectation(state.data)


def _as_observable(observable, n: int) -> Observable:
    if isinstance(observable, Observable):
        obs = observable
    else:
        obs = Observable.single(observable)
    if obs.n != n:
        raise PauliError(f"observable acts on {obs.n} wires, circuit has {n}")
    return obs


def _split_term(term: PauliString, frags: FragmentPair) -> tuple[str, str]:
    """(upstream pattern on non-cut wires, downstream letters) of a term."""
    alpha = "".join(term[w] for w in frags.a_wires)
    down = "".join(term[w] for w in frags.down_wires)
    return alpha, down


def _group_terms(obs: Observable, frags: FragmentPair):
    """Group non-identity terms by their upstream pattern, lexicographic keys.

    Returns (groups, constant) where constant collects all-identity terms.
    """
    groups: dict[str, list[tuple[float, PauliString]]] = {}
    constant = 0.0
    for coeff, term in obs:
        if term.is_identity():
            constant += coeff
            continue
        alpha, _ = _split_term(term, frags)
        groups.setdefault(alpha, []).append((coeff, term))
    return dict(sorted(groups.items())), constant


def _upstream_string(frags: FragmentPair, alpha: str, cut_p: str) -> PauliString:
    letters = ["I"] * frags.upstream.n_wires
    a_locals = [frags.up_wires.index(w) for w in frags.a_wires]
    for local, letter in zip(a_locals, alpha):
        letters[local] = letter
    for local, letter in zip(frags.cut_up_locals, cut_p):
        letters[local] = letter
    return PauliString("".join(letters))


def _downstream_input(frags: FragmentPair, factors: Mapping[int, np.ndarray]) -> np.ndarray:
    """Kron product over downstream locals: given factors on prep wires, |0><0| else."""
    zero = PREP_STATES["0"]
    m = np.ones((1, 1), dtype=complex)
    for local in range(frags.downstream.n_wires):
        m = np.kron(m, factors.get(local, zero))
    return m


def _cut_strings(k: int, alphabet: str) -> list[str]:
    return ["".join(w) for w in itertools.product(sorted(alphabet), repeat=k)]


def _rotation_ops(pattern: str, locals_: Sequence[int]) -> list[GateOp]:
    if not set(pattern) & {"X", "Y"}:
        return []
    ops = []
    for kind, idx, angle in measurement_rotation(PauliString(pattern)):
        ops.append(GateOp(kind, (locals_[idx],), (angle,) if angle is not None else ()))
    return ops


def _parity_signs(n: int, wires: Sequence[int]) -> np.ndarray:
    signs = np.ones(2**n)
    for w in wires:
        bits = (np.arange(2**n) >> (n - 1 - w)) & 1
        signs *= 1.0 - 2.0 * bits
    return signs


def _diag_value(letters: str, bits: tuple[int, ...]) -> float:
    """<b| P |b> for a diagonal string."""
    v = 1.0
    for letter, bit in zip(letters, bits):
        if letter == "Z" and bit:
            v = -v
    return v


class _ShotSampler:
    """Deterministic per-circuit RNG streams derived from one root seed."""

    def __init__(self, seed: int, shots: int):
        if shots <= 0:
            raise ValueError("shots mode requires shots > 0")
        self.seed = int(seed)
        self.shots = int(shots)
        self._counter = 0

    def estimate(self, circuit: Circuit, bindings, parity_wires: Sequence[int]) -> float:
        """Sample the circuit once and average the outcome parity."""
        state = simulate(circuit, bindings)
        dist = outcome_distribution(state.data)
        rng = np.random.default_rng([self.seed, self._counter])
        self._counter += 1
        counts = sample_counts(dist, self.shots, rng)
        signs = _parity_signs(circuit.n_wires, parity_wires)
        return float(counts @ signs) / self.shots

    def distribution(self, circuit: Circuit, bindings) -> np.ndarray:
        state = simulate(circuit, bindings)
        dist = outcome_distribution(state.data)
        rng = np.random.default_rng([self.seed, self._counter])
        self._counter += 1
        counts = sample_counts(dist, self.shots, rng)
        return counts / self.shots


def _upstream_values_exact(frags, alpha, cut_strings, bindings) -> dict[str, float]:
    state = simulate(frags.upstream, bindings)
    return {
        p: expectation(state.data, _upstream_string(frags, alpha, p)) for p in cut_strings
    }


def _upstream_values_shots(frags, alpha, cut_strings, bindings, sampler) -> tuple[dict[str, float], int]:
    """Estimate up(alpha ⊗ P) for every requested P from rotated-basis samples.

    Each P is read from the setting that matches its non-identity letters
    (identity positions measure in Z). Returns the estimates and the number
    of distinct upstream circuits sampled.
    """
    a_locals = [frags.up_wires.index(w) for w in frags.a_wires]
    cut_locals = list(frags.cut_up_locals)
    alpha_rot = _rotation_ops(alpha, a_locals)
    alpha_parity = [loc for loc, letter in zip(a_locals, alpha) if letter != "I"]

    settings: dict[str, list[str]] = {}
    for p in cut_strings:
        settings.setdefault(p.replace("I", "Z"), []).append(p)

    values: dict[str, float] = {}
    n_up = frags.upstream.n_wires
    for setting in sorted(settings):
        ops = alpha_rot + _rotation_ops(setting, cut_locals)
        circuit = frags.upstream.extended(after=ops)
        freq = sampler.distribution(circuit, bindings)
        for p in settings[setting]:
            parity = alpha_parity + [
                loc for loc, letter in zip(cut_locals, p) if letter != "I"
            ]
            values[p] = float(freq @ _parity_signs(n_up, parity))
    return values, len(settings)


def _downstream_values_exact(frags, terms, cut_strings, bindings):
    """down(P) per term via linear-operator injection of P on the prep wires."""
    evolved: dict[str, np.ndarray] = {}
    n_down = frags.downstream.n_wires
    for p in cut_strings:
        factors = {local: PAULI_1Q[letter] for local, letter in zip(frags.prep_wires, p)}
        m0 = _downstream_input(frags, factors)
        evolved[p] = evolve_operator(m0, n_down, frags.downstream.ops, bindings)
    out = []
    for _, term in terms:
        _, down_letters = _split_term(term, frags)
        obs_m = Observable.single(down_letters).matrix()
        out.append({p: float(np.trace(obs_m @ evolved[p]).real) for p in cut_strings})
    return out


def _downstream_prep_estimates(frags, terms, labels_needed, prep_ops_for, bindings, sampler):
    """Sampled Tr[O_down . channel(prep)] per term per preparation label."""
    n_down = frags.downstream.n_wires
    estimates: list[dict[str, float]] = [{} for _ in terms]
    n_circuits = 0
    for label in labels_needed:
        prep = prep_ops_for(label)
        n_circuits += 1
        for t_idx, (_, term) in enumerate(terms):
            _, down_letters = _split_term(term, frags)
            rot = _rotation_ops(down_letters, list(range(n_down)))
            circuit = Circuit(n_down, tuple(prep) + frags.downstream.ops + tuple(rot))
            parity = [loc for loc, letter in enumerate(down_letters) if letter != "I"]
            estimates[t_idx][label] = sampler.estimate(circuit, bindings, parity)
    return estimates, n_circuits


def qcut_expectation(
    fragments: FragmentPair,
    observable: Observable | PauliString | str,
    mode: str = "exact",
    shots: int = 0,
    seed: int | None = None,
    bindings: Mapping[str, float] | None = None,
) -> ReconstructionResult:
    """Full Pauli-basis reconstruction (exact for any valid cut and binding)."""
    return _reconstruct(fragments, observable, mode, shots, seed, bindings, diagonal_only=False)


def ricco_expectation(
    fragments: FragmentPair,
    theta: Sequence[float],
    observable: Observable | PauliString | str,
    mode: str = "exact",
    shots: int = 0,
    seed: int | None = None,
    bindings: Mapping[str, float] | None = None,
) -> ReconstructionResult:
    """Diagonal-basis reconstruction through the optimized cut rotation."""
    ansatz = fragments.require_ansatz()
    merged = dict(bindings or {})
    merged.update(ansatz.bindings(theta))
    return _reconstruct(fragments, observable, mode, shots, seed, merged, diagonal_only=True)


def _reconstruct(frags, observable, mode, shots, seed, bindings, diagonal_only) -> ReconstructionResult:
    n_orig = len(frags.up_wires) + len(frags.c_wires)
    obs = _as_observable(observable, n_orig)
    if mode not in ("exact", "shots"):
        raise ValueError(f"mode must be 'exact' or 'shots', got {mode!r}")
    k = frags.k
    method = "ricco" if diagonal_only else "qcut"
    cut_strings = _cut_strings(k, "IZ" if diagonal_only else "IXYZ")
    groups, constant = _group_terms(obs, frags)

    ledger = ExecutionLedger(phase="reconstruction")
    per_group = ricco_circuit_count(k) if diagonal_only else qcut_circuit_count(k)
    sampler = _ShotSampler(seed if seed is not None else 0, shots) if mode == "shots" else None

    value = constant
    per_term: list[tuple[str, str, float, float]] = []
    for alpha, terms in groups.items():
        if mode == "exact":
            up_vals = _upstream_values_exact(frags, alpha, cut_strings, bindings)
            down_per_term = _downstream_values_exact(frags, terms, cut_strings, bindings)
        else:
            up_vals, n_up_circuits = _upstream_values_shots(frags, alpha, cut_strings, bindings, sampler)
            if diagonal_only:
                labels = ["".join(bits) for bits in itertools.product("01", repeat=k)]

                def prep_ops(label):
                    ops = []
                    for local, bit in zip(frags.prep_wires, label):
                        if bit == "1":
                            ops.append(GateOp("X", (local,)))
                    return ops

            else:
                labels = ["".join(c) for c in itertools.product("01+i", repeat=k)]

                def prep_ops(label):
                    ops = []
                    for local, symbol in zip(frags.prep_wires, label):
                        for kind in PREP_GATES[symbol]:
                            ops.append(GateOp(kind, (local,)))
                    return ops

            prep_estimates, n_down_circuits = _downstream_prep_estimates(
                frags, terms, labels, prep_ops, bindings, sampler
            )
            assert n_up_circuits + n_down_circuits == per_group
            down_per_term = []
            for est in prep_estimates:
                vals = {}
                for p in cut_strings:
                    if diagonal_only:
                        vals[p] = sum(
                            _diag_value(p, tuple(int(b) for b in label)) * est[label]
                            for label in labels
                        )
                    else:
                        total = 0.0
                        for label in labels:
                            coeff = 1.0
                            for letter, symbol in zip(p, label):
                                coeff *= PREP_COEFFS[letter].get(symbol, 0.0)
                                if coeff == 0.0:
                                    break
                            if coeff:
                                total += coeff * est[label]
                        vals[p] = total
                down_per_term.append(vals)
        ledger.add(per_group, shots * per_group if mode == "shots" else 0)

        for (coeff, term), down_vals in zip(terms, down_per_term):
            term_value = 0.0
            for p in cut_strings:
                up, down = up_vals[p], down_vals[p]
                term_value += up * down
                per_term.append((term.letters, p, up, down))
            value += coeff * term_value / 2**k

    result = ReconstructionResult(float(value), ledger, method, tuple(per_term))
    if mode == "exact" and abs(result.value) > obs.coefficient_norm() + 1e-9:
        raise CutError(f"reconstructed value {result.value} exceeds coefficient norm")
    return result


def leakage(
    fragments: FragmentPair,
    theta: Sequence[float],
    observable: Observable | PauliString | str,
    bindings: Mapping[str, float] | None = None,
) -> float:
    """Upper bound on the diagonal method's bias: the summed magnitude of the
    cut-basis contributions it omits. Exact mode only."""
    ansatz = fragments.require_ansatz()
    merged = dict(bindings or {})
    merged.update(ansatz.bindings(theta))
    n_orig = len(fragments.up_wires) + len(fragments.c_wires)
    obs = _as_observable(observable, n_orig)
    k = fragments.k
    off_diagonal = [p for p in _cut_strings(k, "IXYZ") if set(p) & {"X", "Y"}]
    groups, _ = _group_terms(obs, fragments)
    total = 0.0
    for alpha, terms in groups.items():
        up_vals = _upstream_values_exact(fragments, alpha, off_diagonal, merged)
        down_per_term = _downstream_values_exact(fragments, terms, off_diagonal, merged)
        for (coeff, _), down_vals in zip(terms, down_per_term):
            total += abs(coeff) * sum(
                abs(up_vals[p] * down_vals[p]) for p in off_diagonal
            ) / 2**k
    return float(total)
