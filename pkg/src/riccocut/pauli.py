"""Pauli strings, observables, and Pauli-basis density-matrix decomposition.

Conventions used throughout the package:

- A Pauli string is a word over {I, X, Y, Z} with one letter per qubit.
  The leftmost letter acts on qubit 0.
- Qubit 0 is the most significant bit of a computational basis index, so
  ``matrix_of("XZ") == kron(X, Z)``.
- Observables are real-weighted sums of Pauli strings, kept in a canonical
  form (duplicates merged, terms sorted lexicographically).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

PAULI_LETTERS = "IXYZ"

_SQ2 = 1.0 / np.sqrt(2.0)

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Dense-construction guard shared by matrix_of and the diagonalization oracle.
MAX_DENSE_QUBITS = 12


class PauliError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word, e.g. PauliString("XZY")."""

    letters: str

    def __post_init__(self) -> None:
        if not self.letters:
            raise PauliError("empty Pauli string")
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise PauliError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    def __getitem__(self, wire: int) -> str:
        return self.letters[wire]

    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def is_diagonal(self) -> bool:
        """True when every letter is I or Z (computational-basis diagonal)."""
        return not (set(self.letters) & {"X", "Y"})

    def support(self) -> tuple[int, ...]:
        """Wires carrying a non-identity letter."""
        return tuple(w for w, s in enumerate(self.letters) if s != "I")

    def restrict(self, wires: Iterable[int]) -> "PauliString":
        """Letters on the given wires, in the given order."""
        return PauliString("".join(self.letters[w] for w in wires))

    def diagonal_signs(self, n_total: int | None = None) -> np.ndarray:
        """Eigenvalue of this diagonal string on every basis state.

        Returns a +/-1 vector of length 2**n; raises for non-diagonal strings.
        """
        if not self.is_diagonal():
            raise PauliError(f"{self.letters} is not diagonal")
        n = self.n if n_total is None else n_total
        signs = np.ones(2**n)
        for w in self.support():
            bits = (np.arange(2**n) >> (n - 1 - w)) & 1
            signs *= 1.0 - 2.0 * bits
        return signs


def matrix_of(p: PauliString | str) -> np.ndarray:
    """Dense matrix of a Pauli string via Kronecker expansion (n <= 12)."""
    p = _as_pauli(p)
    if p.n > MAX_DENSE_QUBITS:
        raise PauliError(f"dense matrix limited to {MAX_DENSE_QUBITS} qubits, got {p.n}")
    m = np.ones((1, 1), dtype=complex)
    for letter in p.letters:
        m = np.kron(m, PAULI_1Q[letter])
    return m


def _as_pauli(p: PauliString | str) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString(p)


def _apply_letter(tensor: np.ndarray, letter: str, axis: int) -> np.ndarray:
    """Apply a single-qubit Pauli to one axis of a (2,)*r tensor."""
    if letter == "I":
        return tensor
    out = np.tensordot(PAULI_1Q[letter], tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def apply_pauli(p: PauliString | str, state: np.ndarray) -> np.ndarray:
    """P |psi> for a flat 2**n statevector."""
    p = _as_pauli(p)
    n = p.n
    if state.shape != (2**n,):
        raise PauliError(f"state dimension {state.shape} does not match {n} qubits")
    t = state.reshape((2,) * n)
    for w in p.support():
        t = _apply_letter(t, p.letters[w], w)
    return t.reshape(-1)


def expectation(state, p: PauliString | str) -> float:
    """<P> for a state vector or density matrix.

    Accepts a StateVector/DensityMatrix wrapper or a raw ndarray (flat vector
    or square matrix). The result is exact, clipped only by roundoff.
    """
    p = _as_pauli(p)
    data = getattr(state, "data", state)
    data = np.asarray(data)
    dim = 2**p.n
    if data.ndim == 1:
        if data.shape != (dim,):
            raise PauliError(f"state dimension {data.shape[0]} != 2**{p.n}")
        val = np.vdot(data, apply_pauli(p, data)).real
    elif data.ndim == 2:
        if data.shape != (dim, dim):
            raise PauliError(f"density matrix shape {data.shape} != 2**{p.n} square")
        # Tr(P rho): apply P to the row index of rho, then take the trace.
        t = data.reshape((2,) * (2 * p.n))
        for w in p.support():
            t = _apply_letter(t, p.letters[w], w)
        val = np.trace(t.reshape(dim, dim)).real
    else:
        raise PauliError("state must be a vector or a square matrix")
    return float(val)


def all_strings(n: int, alphabet: str = PAULI_LETTERS) -> list[PauliString]:
    """All Pauli strings of length n over the given letters, lexicographic."""
    words = [""]
    for _ in range(n):
        words = [w + a for w in words for a in sorted(alphabet)]
    return [PauliString(w) for w in sorted(words)]


def check_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Validate (Hermitian, PSD, unit trace) and return rho as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise PauliError("density matrix must be square")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise PauliError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise PauliError("density matrix trace is not 1")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -atol:
        raise PauliError(f"density matrix has negative eigenvalue {eigs.min():.3e}")
    return rho


def decompose(rho) -> dict[PauliString, float]:
    """Pauli-basis coefficients c_P = Tr(P rho) of a density matrix.

    The map covers all 4**n strings; rho == (1/2**n) sum_P c_P matrix_of(P).
    Tiny coefficients are kept, not truncated.
    """
    data = np.asarray(getattr(rho, "data", rho))
    n = int(round(np.log2(data.shape[0])))
    data = check_density_matrix(data)
    return {p: expectation(data, p) for p in all_strings(n)}


def reconstruct(coeffs: Mapping[PauliString, float]) -> np.ndarray:
    """Inverse of decompose: (1/2**n) sum_P c_P matrix_of(P)."""
    first = next(iter(coeffs))
    n = first.n
    out = np.zeros((2**n, 2**n), dtype=complex)
    for p, c in coeffs.items():
        out += c * matrix_of(p)
    return out / 2**n


def measurement_rotation(p: PauliString | str) -> list[tuple[str, int, float | None]]:
    """Pre-measurement rotations mapping each letter's eigenbasis to Z.

    Returns (gate_kind, wire, angle) triples in circuit order: nothing for I
    and Z, H for X, and RZ(-pi/2) followed by H for Y (S^dagger up to a global
    phase). Measuring in the computational basis afterwards and averaging
    outcome parities over the string's support reproduces <P>.
    """
    p = _as_pauli(p)
    gates: list[tuple[str, int, float | None]] = []
    for w, letter in enumerate(p.letters):
        if letter == "X":
            gates.append(("H", w, None))
        elif letter == "Y":
            gates.append(("RZ", w, -np.pi / 2))
            gates.append(("H", w, None))
    return gates


Coefficient = Union[int, float]


class Observable:
    """A real-weighted sum of equal-length Pauli strings, in canonical form."""

    def __init__(self, terms: Iterable[tuple[Coefficient, PauliString | str]]):
        merged: dict[str, float] = {}
        n = None
        for coeff, p in terms:
            p = _as_pauli(p)
            if not np.isfinite(coeff):
                raise PauliError(f"non-finite coefficient for {p}")
            if n is None:
                n = p.n
            elif p.n != n:
                raise PauliError(f"term {p} has length {p.n}, expected {n}")
            merged[p.letters] = merged.get(p.letters, 0.0) + float(coeff)
        if n is None:
            raise PauliError("observable needs at least one term")
        self.n = n
        self.terms: list[tuple[float, PauliString]] = [
            (merged[w], PauliString(w)) for w in sorted(merged)
        ]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Observable):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __repr__(self) -> str:
        inner = " + ".join(f"{c:g}*{p}" for c, p in self.terms[:4])
        more = "" if len(self.terms) <= 4 else f" + ... ({len(self.terms)} terms)"
        return f"Observable({inner}{more})"

    def coefficient_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def matrix(self) -> np.ndarray:
        out = np.zeros((2**self.n, 2**self.n), dtype=complex)
        for c, p in self.terms:
            out += c * matrix_of(p)
        return out

    def expectation(self, state) -> float:
        return float(sum(c * expectation(state, p) for c, p in self.terms))

    @classmethod
    def single(cls, p: PauliString | str, coeff: float = 1.0) -> "Observable":
        return cls([(coeff, p)])

    @classmethod
    def from_text(cls, text: str) -> "Observable":
        """Parse the line format '<coefficient> <paulistring>', '#' comments."""
        terms = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise PauliError(f"line {lineno}: expected '<coefficient> <paulistring>', got {raw!r}")
            try:
                coeff = float(fields[0])
            except ValueError:
                raise PauliError(f"line {lineno}: non-numeric coefficient {fields[0]!r}") from None
            try:
                p = PauliString(fields[1])
            except PauliError as exc:
                raise PauliError(f"line {lineno}: {exc}") from None
            terms.append((coeff, p))
        return cls(terms)

    def to_text(self) -> str:
        return "\n".join(f"{c!r} {p}" for c, p in self.terms) + "\n"
