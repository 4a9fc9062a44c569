"""Dense statevector and density-matrix simulation.

Wire 0 is the most significant bit of a basis index: reshaping a flat
2**n vector to shape (2,)*n puts wire w on axis w. Gates are applied by
tensor contraction against the target axes. All stochastic operations take
an explicit seed or numpy Generator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuits import Circuit, CircuitError, GateOp

NORM_ATOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    data: np.ndarray
    n: int

    @classmethod
    def wrap(cls, amplitudes: np.ndarray) -> "StateVector":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n = int(round(np.log2(amplitudes.size)))
        if amplitudes.shape != (2**n,):
            raise ValueError("amplitude count is not a power of 2")
        if abs(np.linalg.norm(amplitudes) - 1.0) > NORM_ATOL:
            raise ValueError("state is not normalized")
        return cls(amplitudes, n)

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amp = np.zeros(2**n, dtype=complex)
        amp[0] = 1.0
        return cls(amp, n)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.data, self.data.conj()), self.n)


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray
    n: int

    @classmethod
    def wrap(cls, entries: np.ndarray) -> "DensityMatrix":
        from .pauli import check_density_matrix

        entries = check_density_matrix(entries)
        n = int(round(np.log2(entries.shape[0])))
        return cls(entries, n)

    def purity(self) -> float:
        return float(np.trace(self.data @ self.data).real)


def _apply_gate_tensor(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract an m-wire gate against the given axes of a (2,)*r tensor."""
    m = len(axes)
    gate = matrix.reshape((2,) * (2 * m))
    out = np.tensordot(gate, tensor, axes=(tuple(range(m, 2 * m)), tuple(axes)))
    return np.moveaxis(out, tuple(range(m)), tuple(axes))


def apply_ops(
    state: np.ndarray,
    n: int,
    ops: Iterable[GateOp],
    bindings: Mapping[str, float] | None = None,
) -> np.ndarray:
    """Apply gates to a flat 2**n vector; linear, no normalization enforced."""
    t = np.asarray(state, dtype=complex).reshape((2,) * n)
    for op in ops:
        t = _apply_gate_tensor(t, op.resolved_matrix(bindings), op.wires)
    return t.reshape(-1)


def simulate(
    circuit: Circuit,
    bindings: Mapping[str, float] | None = None,
    initial_state: np.ndarray | StateVector | None = None,
) -> StateVector:
    """Run a circuit from |0...0> (or a declared initial state)."""
    bindings = bindings or {}
    missing = circuit.param_names - set(bindings)
    if missing:
        raise CircuitError(f"unbound parameters {sorted(missing)}")
    if initial_state is None:
        amp = np.zeros(2**circuit.n_wires, dtype=complex)
        amp[0] = 1.0
    else:
        amp = np.asarray(getattr(initial_state, "data", initial_state), dtype=complex)
        if amp.shape != (2**circuit.n_wires,):
            raise CircuitError("initial state dimension does not match register")
    out = apply_ops(amp, circuit.n_wires, circuit.ops, bindings)
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > NORM_ATOL:
        raise CircuitError(f"output norm drifted to {norm}")
    return StateVector(out, circuit.n_wires)


def evolve_operator(
    operator: np.ndarray,
    n: int,
    ops: Iterable[GateOp],
    bindings: Mapping[str, float] | None = None,
) -> np.ndarray:
    """Conjugate a 2**n x 2**n operator through a gate sequence: M -> G M G^dagger.

    The input need not be a physical state; reconstruction in exact mode
    feeds Pauli matrices through this path.
    """
    dim = 2**n
    t = np.asarray(operator, dtype=complex).reshape((2,) * (2 * n))
    for op in ops:
        g = op.resolved_matrix(bindings)
        t = _apply_gate_tensor(t, g, op.wires)  # row indices
        t = _apply_gate_tensor(t, g.conj(), [n + w for w in op.wires])  # column indices
    return t.reshape(dim, dim)


def ops_to_matrix(n: int, ops: Iterable[GateOp], bindings: Mapping[str, float] | None = None) -> np.ndarray:
    """Full 2**n x 2**n unitary of a gate sequence."""
    dim = 2**n
    t = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for op in ops:
        t = _apply_gate_tensor(t, op.resolved_matrix(bindings), op.wires)
    return t.reshape(dim, dim)


def partial_trace(state: StateVector | DensityMatrix | np.ndarray, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on `keep` (ascending wire order)."""
    keep = sorted(set(int(w) for w in keep))
    data = np.asarray(getattr(state, "data", state))
    if data.ndim == 1:
        n = int(round(np.log2(data.size)))
        if not keep or any(w < 0 or w >= n for w in keep):
            raise ValueError(f"keep set {keep} invalid for {n} wires")
        drop = [w for w in range(n) if w not in keep]
        t = data.reshape((2,) * n)
        # group kept axes first, then contract psi psi^dagger over dropped axes
        perm = keep + drop
        t = np.transpose(t, perm).reshape(2 ** len(keep), 2 ** len(drop))
        rho = t @ t.conj().T
    else:
        n = int(round(np.log2(data.shape[0])))
        if not keep or any(w < 0 or w >= n for w in keep):
            raise ValueError(f"keep set {keep} invalid for {n} wires")
        t = data.reshape((2,) * (2 * n))
        for w in sorted((w for w in range(n) if w not in keep), reverse=True):
            t = np.trace(t, axis1=w, axis2=t.ndim // 2 + w)
        dim = 2 ** len(keep)
        rho = t.reshape(dim, dim)
    return DensityMatrix(rho, len(keep))


def outcome_distribution(state: StateVector | np.ndarray, wires: Iterable[int] | None = None) -> np.ndarray:
    """Computational-basis probabilities, marginalized to `wires` (ascending)."""
    data = np.asarray(getattr(state, "data", state))
    n = int(round(np.log2(data.size)))
    probs = (data.real**2 + data.imag**2).reshape((2,) * n)
    if wires is None:
        return probs.reshape(-1)
    keep = sorted(set(int(w) for w in wires))
    if any(w < 0 or w >= n for w in keep):
        raise ValueError(f"wires {keep} invalid for {n} wires")
    drop = tuple(w for w in range(n) if w not in keep)
    if drop:
        probs = probs.sum(axis=drop)
    return probs.reshape(-1)


def sample_counts(
    distribution: np.ndarray,
    shots: int,
    seed: int | np.random.Generator,
) -> np.ndarray:
    """Multinomial outcome histogram; deterministic for a fixed seed."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    p = np.asarray(distribution, dtype=float)
    if p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("invalid distribution")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.multinomial(shots, p)
