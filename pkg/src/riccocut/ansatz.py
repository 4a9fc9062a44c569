"""Parameterized cut-rotation templates.

The rotation inserted at a cut acts on the k cut wires only. Templates are
identity at theta = 0 and built from single-parameter rotations so the
parameter-shift rule applies to every angle:

- k = 1: one ROT (3 parameters).
- k = 2: ROT on each wire, an RXX/RYY/RZZ entangling core, ROT on each wire
  (15 parameters, a universal two-qubit decomposition).
- k >= 3: L layers of per-wire RZ and RY plus an RZZ ring (3*k*L parameters).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuits import GateOp, ParamRef
from .sim import ops_to_matrix


@dataclass(frozen=True)
class RiccoAnsatz:
    k: int
    layers: int = 1
    prefix: str = "ricco"
    param_names: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("cut width must be >= 1")
        if self.k == 1:
            count = 3
        elif self.k == 2:
            count = 15
        else:
            if self.layers < 1:
                raise ValueError("need at least one layer")
            count = 3 * self.k * self.layers
        names = tuple(f"{self.prefix}_{i}" for i in range(count))
        object.__setattr__(self, "param_names", names)

    @property
    def param_count(self) -> int:
        return len(self.param_names)

    def _refs(self) -> list[ParamRef]:
        return [ParamRef(name) for name in self.param_names]

    def ops(self, wires: Sequence[int]) -> tuple[GateOp, ...]:
        """Gate template on the given wires (len(wires) == k)."""
        if len(wires) != self.k:
            raise ValueError(f"template acts on {self.k} wires, got {len(wires)}")
        r = self._refs()
        w = list(wires)
        if self.k == 1:
            return (GateOp("ROT", (w[0],), (r[0], r[1], r[2])),)
        if self.k == 2:
            return (
                GateOp("ROT", (w[0],), (r[0], r[1], r[2])),
                GateOp("ROT", (w[1],), (r[3], r[4], r[5])),
                GateOp("RXX", (w[0], w[1]), (r[6],)),
                GateOp("RYY", (w[0], w[1]), (r[7],)),
                GateOp("RZZ", (w[0], w[1]), (r[8],)),
                GateOp("ROT", (w[0],), (r[9], r[10], r[11])),
                GateOp("ROT", (w[1],), (r[12], r[13], r[14])),
            )
        ops: list[GateOp] = []
        it = iter(r)
        for _ in range(self.layers):
            for wi in w:
                ops.append(GateOp("RZ", (wi,), (next(it),)))
                ops.append(GateOp("RY", (wi,), (next(it),)))
            for j in range(self.k):
                ops.append(GateOp("RZZ", (w[j], w[(j + 1) % self.k]), (next(it),)))
        return tuple(ops)

    def bindings(self, theta: Sequence[float]) -> dict[str, float]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.param_count,):
            raise ValueError(f"expected {self.param_count} parameters, got {theta.shape}")
        return dict(zip(self.param_names, theta.tolist()))

    def matrix(self, theta: Sequence[float]) -> np.ndarray:
        """The composed 2**k unitary at the given parameter values."""
        return ops_to_matrix(self.k, self.ops(range(self.k)), self.bindings(theta))

    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 2.0 * np.pi, size=self.param_count)
