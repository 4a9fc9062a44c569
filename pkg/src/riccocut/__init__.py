"""Quantum circuit cutting with two reconstruction backends.

`qcut` reconstructs expectation values from fragment executions over the full
Pauli basis at the cut (3**k measurement settings + 4**k preparations per
observable group). `ricco` first optimizes a rotation inserted at the cut so
a single computational-basis setting suffices upstream (1 + 2**k circuits),
trading circuit count for an optimization loop. A VQE driver demonstrates
both on a bundled molecular Hamiltonian.
"""
from .ansatz import RiccoAnsatz
from .circuits import Circuit, CircuitError, GateOp, ParamRef, parse, serialize
from .cutting import (
    CutError,
    CutSpec,
    FragmentPair,
    fragment,
    haar_unitary,
    insert_ricco,
    random_benchmark,
    unentangled_benchmark,
)
from .pauli import Observable, PauliError, PauliString, decompose, expectation, matrix_of
from .sim import (
    DensityMatrix,
    StateVector,
    outcome_distribution,
    partial_trace,
    sample_counts,
    simulate,
)

__all__ = [
    "Circuit",
    "CircuitError",
    "CutError",
    "CutSpec",
    "DensityMatrix",
    "FragmentPair",
    "GateOp",
    "Observable",
    "ParamRef",
    "PauliError",
    "PauliString",
    "RiccoAnsatz",
    "StateVector",
    "decompose",
    "expectation",
    "fragment",
    "haar_unitary",
    "insert_ricco",
    "matrix_of",
    "outcome_distribution",
    "parse",
    "partial_trace",
    "random_benchmark",
    "sample_counts",
    "serialize",
    "simulate",
    "unentangled_benchmark",
]

__version__ = "0.1.0"
