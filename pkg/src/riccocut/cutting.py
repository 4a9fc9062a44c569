"""Circuit cutting: cut declaration, fragmentation, and benchmark circuits.

A cut severs k wires at one time point. Gates before the cut may touch only
upstream wires, gates at or after it only downstream wires; the cut wires
belong to both sides (they end the upstream fragment and start the
downstream one as preparation wires). Local wire order inside each fragment
preserves the original ascending wire order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ansatz import RiccoAnsatz
from .circuits import Circuit, GateOp, adjoint_ops


class CutError(ValueError):
    pass


@dataclass(frozen=True)
class CutSpec:
    time_index: int
    cut_wires: tuple[int, ...]

    def __post_init__(self):
        wires = tuple(sorted(int(w) for w in self.cut_wires))
        if len(set(wires)) != len(wires) or not wires:
            raise CutError(f"cut wires must be a nonempty set, got {self.cut_wires}")
        object.__setattr__(self, "cut_wires", wires)
        if self.time_index < 0:
            raise CutError("time_index must be >= 0")

    @property
    def k(self) -> int:
        return len(self.cut_wires)


@dataclass(frozen=True)
class FragmentPair:
    """Upstream/downstream subcircuits produced by one cut.

    `up_wires` / `down_wires` list the original wire indices in fragment-local
    order; the k cut wires appear in both. `prep_wires` are the downstream
    local indices whose initial state is injected at reconstruction time.
    """

    upstream: Circuit
    downstream: Circuit
    up_wires: tuple[int, ...]
    down_wires: tuple[int, ...]
    cut_wires: tuple[int, ...]
    ansatz: RiccoAnsatz | None = None

    @property
    def k(self) -> int:
        return len(self.cut_wires)

    @property
    def a_wires(self) -> tuple[int, ...]:
        """Original upstream wires that are not cut."""
        return tuple(w for w in self.up_wires if w not in self.cut_wires)

    @property
    def c_wires(self) -> tuple[int, ...]:
        """Original downstream wires that are not cut."""
        return tuple(w for w in self.down_wires if w not in self.cut_wires)

    @property
    def cut_up_locals(self) -> tuple[int, ...]:
        return tuple(self.up_wires.index(w) for w in self.cut_wires)

    @property
    def prep_wires(self) -> tuple[int, ...]:
        return tuple(self.down_wires.index(w) for w in self.cut_wires)

    @property
    def cut_map(self) -> tuple[tuple[int, int, int], ...]:
        """(original wire, upstream local, downstream local) per cut wire."""
        return tuple(
            (w, self.up_wires.index(w), self.down_wires.index(w)) for w in self.cut_wires
        )

    @property
    def register_sizes(self) -> tuple[int, int, int]:
        """(upstream-only, cut, downstream-only) wire counts."""
        return (len(self.a_wires), self.k, len(self.c_wires))

    def require_ansatz(self) -> RiccoAnsatz:
        if self.ansatz is None:
            raise CutError("fragments carry no cut rotation; call insert_ricco first")
        return self.ansatz


def fragment(circuit: Circuit, cut: CutSpec) -> FragmentPair:
    """Split a circuit at the cut into upstream/downstream fragments."""
    if cut.time_index > len(circuit.ops):
        raise CutError(f"time_index {cut.time_index} beyond {len(circuit.ops)} ops")
    cut_set = set(cut.cut_wires)
    if any(w >= circuit.n_wires for w in cut_set):
        raise CutError(f"cut wires {cut.cut_wires} outside register of {circuit.n_wires}")

    before = circuit.ops[: cut.time_index]
    after = circuit.ops[cut.time_index :]
    touched_before = {w for op in before for w in op.wires} - cut_set
    touched_after = {w for op in after for w in op.wires} - cut_set
    conflict = touched_before & touched_after
    if conflict:
        w = min(conflict)
        for i, op in enumerate(after, start=cut.time_index):
            if w in op.wires:
                raise CutError(
                    f"ops[{i}] ({op.kind} on {op.wires}) touches wire {w} on both sides of the cut"
                )
    # wires never touched carry |0> on both sides; keep them upstream
    untouched = set(range(circuit.n_wires)) - touched_before - touched_after - cut_set
    up_wires = tuple(sorted(touched_before | untouched | cut_set))
    down_wires = tuple(sorted(touched_after | cut_set))

    up_map = {w: i for i, w in enumerate(up_wires)}
    down_map = {w: i for i, w in enumerate(down_wires)}
    upstream = Circuit(len(up_wires), [op.remap(up_map) for op in before])
    downstream = Circuit(len(down_wires), [op.remap(down_map) for op in after])
    pair = FragmentPair(upstream, downstream, up_wires, down_wires, cut.cut_wires)
    n_a, k, n_c = pair.register_sizes
    assert n_a + k + n_c == circuit.n_wires
    return pair


def insert_ricco(fragments: FragmentPair, ansatz: RiccoAnsatz) -> FragmentPair:
    """Append U(theta) to the upstream cut wires and prepend U^dagger(theta)
    to the downstream preparation wires. Same named parameters on both sides,
    so any binding keeps U U^dagger = I at the cut."""
    if ansatz.k != fragments.k:
        raise CutError(f"ansatz acts on {ansatz.k} wires, cut has {fragments.k}")
    u_ops = ansatz.ops(fragments.cut_up_locals)
    u_dag_ops = adjoint_ops(ansatz.ops(fragments.prep_wires))
    return FragmentPair(
        fragments.upstream.extended(after=u_ops),
        fragments.downstream.extended(before=u_dag_ops),
        fragments.up_wires,
        fragments.down_wires,
        fragments.cut_wires,
        ansatz,
    )


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix with the
    R-diagonal phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# Fixed two-block topologies: (total wires, first block wires, second block wires)
_BENCHMARK_LAYOUT = {
    1: (7, (0, 1, 2, 3), (3, 4, 5, 6)),
    2: (8, (0, 1, 2, 3, 4), (3, 4, 5, 6, 7)),
}


def random_benchmark(k: int, seed: int) -> tuple[Circuit, CutSpec]:
    """Two Haar-random blocks overlapping on the k cut wires.

    k=1: 7 qubits, 16x16 blocks on {0..3} and {3..6}, cut on wire 3.
    k=2: 8 qubits, 32x32 blocks on {0..4} and {3..7}, cut on wires {3,4}.
    """
    if k not in _BENCHMARK_LAYOUT:
        raise CutError(f"benchmark supports k in {sorted(_BENCHMARK_LAYOUT)}, got {k}")
    n, block_a, block_b = _BENCHMARK_LAYOUT[k]
    rng = np.random.default_rng([k, seed])
    ops = (
        GateOp("U", block_a, (), haar_unitary(2 ** len(block_a), rng)),
        GateOp("U", block_b, (), haar_unitary(2 ** len(block_b), rng)),
    )
    cut = CutSpec(time_index=1, cut_wires=tuple(sorted(set(block_a) & set(block_b))))
    return Circuit(n, ops), cut


def unentangled_benchmark(k: int, seed: int) -> tuple[Circuit, CutSpec]:
    """Benchmark variant whose cut-register state is a product state.

    The first block acts on the cut wires only, so the state at the cut is
    unentangled with the rest of the upstream register and a cut rotation can
    align it with a computational basis state exactly.
    """
    if k not in _BENCHMARK_LAYOUT:
        raise CutError(f"benchmark supports k in {sorted(_BENCHMARK_LAYOUT)}, got {k}")
    n, block_a, block_b = _BENCHMARK_LAYOUT[k]
    cut_wires = tuple(sorted(set(block_a) & set(block_b)))
    rng = np.random.default_rng([k, seed, 0xA11])
    ops = (
        GateOp("U", cut_wires, (), haar_unitary(2**k, rng)),
        GateOp("U", block_b, (), haar_unitary(2 ** len(block_b), rng)),
    )
    return Circuit(n, ops), CutSpec(time_index=1, cut_wires=cut_wires)
