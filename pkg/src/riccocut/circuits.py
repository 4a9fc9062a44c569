"""Gate-level circuit IR with named parameters and JSON serialization.

Gate set: H, X, Y, Z, S, CNOT, RX, RY, RZ, RXX, RYY, RZZ, ROT, and U (a
fixed-matrix unitary on any number of wires). ROT(phi, theta, omega) is the
Euler decomposition RZ(omega) @ RY(theta) @ RZ(phi), i.e. RZ(phi) acts first.
CNOT wires are (control, target).

A gate angle is either a literal float or a ParamRef(name, factor) that
resolves to factor * bindings[name]; factors let an adjoint circuit reuse the
same named parameter with the opposite sign.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

_SQ2 = 1.0 / np.sqrt(2.0)

FIXED_GATES: dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}

# name -> (wire count, angle count)
PARAM_GATES: dict[str, tuple[int, int]] = {
    "RX": (1, 1),
    "RY": (1, 1),
    "RZ": (1, 1),
    "ROT": (1, 3),
    "RXX": (2, 1),
    "RYY": (2, 1),
    "RZZ": (2, 1),
}

GATE_KINDS = set(FIXED_GATES) | set(PARAM_GATES) | {"U"}

UNITARY_ATOL = 1e-10


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class ParamRef:
    """A named angle reference; resolves to factor * bindings[name]."""

    name: str
    factor: float = 1.0

    def resolve(self, bindings: Mapping[str, float]) -> float:
        if self.name not in bindings:
            raise CircuitError(f"unbound parameter {self.name!r}")
        return self.factor * float(bindings[self.name])


Angle = "float | ParamRef"


def _rx(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]])


def _two_qubit_rotation(axis: str, t: float) -> np.ndarray:
    # exp(-i t P⊗P / 2) for P in {X, Y, Z}
    from .pauli import PAULI_1Q

    p = PAULI_1Q[axis]
    pp = np.kron(p, p)
    c, s = np.cos(t / 2), np.sin(t / 2)
    return c * np.eye(4) - 1j * s * pp


def gate_matrix(kind: str, angles: Sequence[float] = (), matrix: np.ndarray | None = None) -> np.ndarray:
    """Resolved unitary for a gate kind; angles must already be floats."""
    if kind in FIXED_GATES:
        return FIXED_GATES[kind]
    if kind == "U":
        if matrix is None:
            raise CircuitError("U gate requires a matrix")
        return matrix
    if kind == "RX":
        return _rx(angles[0])
    if kind == "RY":
        return _ry(angles[0])
    if kind == "RZ":
        return _rz(angles[0])
    if kind == "ROT":
        phi, theta, omega = angles
        return _rz(omega) @ _ry(theta) @ _rz(phi)
    if kind in ("RXX", "RYY", "RZZ"):
        return _two_qubit_rotation(kind[1], angles[0])
    raise CircuitError(f"unknown gate kind {kind!r}")


def _check_unitary(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise CircuitError(f"{what}: matrix must be square")
    dim = m.shape[0]
    if dim & (dim - 1) or dim == 0:
        raise CircuitError(f"{what}: dimension {dim} is not a power of 2")
    if not np.allclose(m.conj().T @ m, np.eye(dim), atol=UNITARY_ATOL):
        raise CircuitError(f"{what}: matrix is not unitary")
    return m


@dataclass(frozen=True)
class GateOp:
    kind: str
    wires: tuple[int, ...]
    params: tuple = ()
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        wires = tuple(int(w) for w in self.wires)
        object.__setattr__(self, "wires", wires)
        if len(set(wires)) != len(wires):
            raise CircuitError(f"{self.kind}: repeated wires {wires}")
        if self.kind == "U":
            m = _check_unitary(self.matrix, "U gate")
            object.__setattr__(self, "matrix", m)
            n_w = int(round(np.log2(m.shape[0])))
            if n_w != len(wires):
                raise CircuitError(f"U gate: {m.shape[0]}x{m.shape[0]} matrix needs {n_w} wires, got {len(wires)}")
        elif self.kind in PARAM_GATES:
            n_w, n_a = PARAM_GATES[self.kind]
            if len(wires) != n_w:
                raise CircuitError(f"{self.kind} acts on {n_w} wires, got {len(wires)}")
            if len(self.params) != n_a:
                raise CircuitError(f"{self.kind} takes {n_a} angles, got {len(self.params)}")
        else:
            n_w = 1 if self.kind != "CNOT" else 2
            if len(wires) != n_w:
                raise CircuitError(f"{self.kind} acts on {n_w} wires, got {len(wires)}")
            if self.params:
                raise CircuitError(f"{self.kind} takes no angles")
        object.__setattr__(self, "params", tuple(self.params))

    @property
    def n_wires(self) -> int:
        return len(self.wires)

    def param_names(self) -> set[str]:
        return {a.name for a in self.params if isinstance(a, ParamRef)}

    def resolved_angles(self, bindings: Mapping[str, float]) -> tuple[float, ...]:
        out = []
        for a in self.params:
            out.append(a.resolve(bindings) if isinstance(a, ParamRef) else float(a))
        return tuple(out)

    def resolved_matrix(self, bindings: Mapping[str, float] | None = None) -> np.ndarray:
        return gate_matrix(self.kind, self.resolved_angles(bindings or {}), self.matrix)

    def remap(self, wire_map: Mapping[int, int]) -> "GateOp":
        return GateOp(self.kind, tuple(wire_map[w] for w in self.wires), self.params, self.matrix)

    def adjoint(self) -> "GateOp":
        """The inverse gate, reusing named parameters with negated factors."""
        if self.kind in ("H", "X", "Y", "Z", "CNOT"):
            return self
        if self.kind == "S":
            return GateOp("U", self.wires, (), FIXED_GATES["S"].conj().T)
        if self.kind == "U":
            return GateOp("U", self.wires, (), self.matrix.conj().T)
        neg = tuple(
            ParamRef(a.name, -a.factor) if isinstance(a, ParamRef) else -float(a)
            for a in self.params
        )
        if self.kind == "ROT":
            # (RZ(w) RY(t) RZ(p))^dagger = RZ(-p) RY(-t) RZ(-w)
            return GateOp("ROT", self.wires, (neg[2], neg[1], neg[0]))
        return GateOp(self.kind, self.wires, neg)


class Circuit:
    """An ordered gate list on a fixed register; immutable after build."""

    def __init__(self, n_wires: int, ops: Iterable[GateOp] = ()):
        if n_wires <= 0:
            raise CircuitError("n_wires must be positive")
        self.n_wires = int(n_wires)
        self.ops: tuple[GateOp, ...] = tuple(ops)
        for i, op in enumerate(self.ops):
            for w in op.wires:
                if not 0 <= w < self.n_wires:
                    raise CircuitError(f"ops[{i}]: wire {w} out of range for {self.n_wires} wires")

    @property
    def param_names(self) -> set[str]:
        names: set[str] = set()
        for op in self.ops:
            names |= op.param_names()
        return names

    def extended(self, before: Iterable[GateOp] = (), after: Iterable[GateOp] = ()) -> "Circuit":
        return Circuit(self.n_wires, tuple(before) + self.ops + tuple(after))

    def __repr__(self) -> str:
        return f"Circuit(n_wires={self.n_wires}, ops={len(self.ops)}, params={sorted(self.param_names)})"


def adjoint_ops(ops: Sequence[GateOp]) -> tuple[GateOp, ...]:
    """Adjoint of a gate sequence: reversed order, each gate inverted."""
    return tuple(op.adjoint() for op in reversed(ops))


# --- JSON serialization ----------------------------------------------------

def _angle_to_json(a):
    if isinstance(a, ParamRef):
        return {"ref": a.name, "factor": a.factor}
    return float(a)


def _angle_from_json(obj, where: str):
    if isinstance(obj, (int, float)):
        return float(obj)
    if isinstance(obj, dict) and "ref" in obj:
        name = obj["ref"]
        if not isinstance(name, str) or not name:
            raise CircuitError(f"{where}: bad parameter reference {obj!r}")
        return ParamRef(name, float(obj.get("factor", 1.0)))
    raise CircuitError(f"{where}: bad angle {obj!r}")


def _matrix_to_json(m: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _matrix_from_json(rows, where: str) -> np.ndarray:
    try:
        m = np.array([[complex(re, im) for re, im in row] for row in rows])
    except (TypeError, ValueError):
        raise CircuitError(f"{where}: malformed matrix entries") from None
    return m


def serialize(circuit: Circuit) -> str:
    """Circuit -> JSON text; deterministic, round-trips byte-identically."""
    ops = []
    for op in circuit.ops:
        entry: dict = {"kind": op.kind, "wires": list(op.wires)}
        if op.params:
            entry["params"] = [_angle_to_json(a) for a in op.params]
        if op.matrix is not None:
            entry["matrix"] = _matrix_to_json(op.matrix)
        ops.append(entry)
    doc = {"n_wires": circuit.n_wires, "ops": ops}
    return json.dumps(doc, indent=1) + "\n"


def parse(text: str) -> Circuit:
    """JSON text -> Circuit, rejecting malformed input with field diagnostics."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "n_wires" not in doc or "ops" not in doc:
        raise CircuitError("document must be an object with 'n_wires' and 'ops'")
    ops = []
    for i, entry in enumerate(doc["ops"]):
        where = f"ops[{i}]"
        if not isinstance(entry, dict) or "kind" not in entry or "wires" not in entry:
            raise CircuitError(f"{where}: each op needs 'kind' and 'wires'")
        kind = entry["kind"]
        if kind not in GATE_KINDS:
            raise CircuitError(f"{where}: unknown gate kind {kind!r}")
        params = tuple(
            _angle_from_json(a, f"{where}.params[{j}]")
            for j, a in enumerate(entry.get("params", []))
        )
        matrix = None
        if "matrix" in entry:
            matrix = _matrix_from_json(entry["matrix"], f"{where}.matrix")
        try:
            ops.append(GateOp(kind, tuple(entry["wires"]), params, matrix))
        except CircuitError as exc:
            raise CircuitError(f"{where}: {exc}") from None
    try:
        return Circuit(doc["n_wires"], ops)
    except CircuitError as exc:
        raise CircuitError(str(exc)) from None
