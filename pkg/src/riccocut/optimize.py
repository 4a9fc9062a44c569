"""Cut-rotation optimization.

The inner loop drives the upstream fragment's computational-basis outcome
distribution (taken under the observable group's basis rotations, with the
cut rotation applied) toward a deterministic distribution. Two cost
functions over that probability vector p are provided:

- ``alignment`` (default): (1 - sum_x p_x**2)**2, zero exactly when the
  distribution is deterministic; for one qubit it equals
  ((1 - <Z>**2) / 2)**2, minimized at <Z> = +/-1 and maximized at <Z> = 0.
- ``paper``: (1 - prod_x p_x)**2, the published product-of-fidelities form,
  kept behind a switch for comparison. Note its minimum does not coincide
  with a deterministic distribution (see the package decision record).

Gradients chain through the cost either by the parameter-shift rule
(every template angle generates a rotation, so +/- pi/2 shifts are exact)
or by central finite differences.

The loop is plain Adam with stop rule |cost_prev - cost_new| <= eps, an
iteration cap, and an optional geometric learning-rate decay for runs that
must converge far below the stop tolerance. In shots mode the convergence
test uses a 5-iteration moving average to damp sampling noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .ansatz import RiccoAnsatz
from .circuits import PARAM_GATES
from .cutting import FragmentPair
from .pauli import PauliString
from .reconstruct import ExecutionLedger, _rotation_ops
from .sim import apply_ops, sample_counts


class OptimizationError(RuntimeError):
    def __init__(self, message: str, trace: "OptimizationTrace | None" = None):
        super().__init__(message)
        self.trace = trace


# --- cost functions over outcome probabilities ------------------------------

def cost_alignment(probabilities: np.ndarray) -> float:
    p = np.asarray(probabilities, dtype=float)
    return float((1.0 - np.sum(p * p)) ** 2)


def _grad_alignment(p: np.ndarray) -> np.ndarray:
    return -4.0 * (1.0 - np.sum(p * p)) * p


def cost_paper(probabilities: np.ndarray) -> float:
    p = np.asarray(probabilities, dtype=float)
    return float((1.0 - np.prod(p)) ** 2)


def _grad_paper(p: np.ndarray) -> np.ndarray:
    # product excluding each entry, zero-safe via prefix/suffix products
    n = len(p)
    prefix = np.concatenate(([1.0], np.cumprod(p[:-1])))
    suffix = np.concatenate((np.cumprod(p[::-1])[-2::-1], [1.0]))
    excl = prefix * suffix
    return -2.0 * (1.0 - np.prod(p)) * excl


COSTS: dict[str, tuple[Callable, Callable]] = {
    "alignment": (cost_alignment, _grad_alignment),
    "paper": (cost_paper, _grad_paper),
}


def fidelity_restricted(
    expectations: Mapping, basis_state: str, n_a: int, n_b: int
) -> float:
    """Restricted-sum fidelity proxy between a state and a basis vector.

    Sums (1/2**n) <P>_state <P>_basis over P in {Z**n_a} tensor {I,Z}**n_b.
    This is the published restricted set; it is NOT the true overlap
    <x|rho|x> in general because the first register contributes only its
    all-Z word.
    """
    n = n_a + n_b
    if len(basis_state) != n or set(basis_state) - {"0", "1"}:
        raise ValueError(f"basis state must be {n} bits, got {basis_state!r}")
    total = 0.0
    for idx in range(2**n_b):
        b_word = format(idx, f"0{n_b}b").replace("0", "I").replace("1", "Z") if n_b else ""
        word = "Z" * n_a + b_word
        key = word
        if key not in expectations:
            key = PauliString(word)
            if key not in expectations:
                raise KeyError(f"missing expectation for required string {word}")
        sign = 1.0
        for letter, bit in zip(word, basis_state):
            if letter == "Z" and bit == "1":
                sign = -sign
        total += float(expectations[key]) * sign
    return total / 2**n


# --- upstream probability evaluation ----------------------------------------

class UpstreamProbabilityFn:
    """Outcome distribution of the upstream fragment as a function of the
    cut-rotation parameters.

    The fragment's gates up to the cut rotation (plus the group's basis
    rotations, which act on disjoint wires and commute with it) are applied
    once and cached; each evaluation applies only the composed rotation.
    """

    def __init__(
        self,
        fragments: FragmentPair,
        upstream_pattern: str | None = None,
        bindings: Mapping[str, float] | None = None,
        shots: int = 0,
        seed: int = 0,
    ):
        self.ansatz = fragments.require_ansatz()
        for op in self.ansatz.ops(fragments.cut_up_locals):
            if op.kind not in PARAM_GATES:
                raise OptimizationError(f"non-rotation gate {op.kind} in cut template")
        n_up = fragments.upstream.n_wires
        template_len = len(self.ansatz.ops(fragments.cut_up_locals))
        prefix_ops = fragments.upstream.ops[: len(fragments.upstream.ops) - template_len]
        rot_ops = []
        if upstream_pattern:
            a_locals = [fragments.up_wires.index(w) for w in fragments.a_wires]
            rot_ops = _rotation_ops(upstream_pattern, a_locals)
        base = np.zeros(2**n_up, dtype=complex)
        base[0] = 1.0
        self._prefix = apply_ops(base, n_up, tuple(prefix_ops) + tuple(rot_ops), bindings)
        self._n_up = n_up
        self._cut_locals = fragments.cut_up_locals
        self.shots = int(shots)
        self._seed = int(seed)
        self._draws = 0

    def exact(self, theta: Sequence[float]) -> np.ndarray:
        u = self.ansatz.matrix(theta)
        k = self.ansatz.k
        t = self._prefix.reshape((2,) * self._n_up)
        gate = u.reshape((2,) * (2 * k))
        out = np.tensordot(gate, t, axes=(tuple(range(k, 2 * k)), self._cut_locals))
        out = np.moveaxis(out, tuple(range(k)), self._cut_locals)
        amp = out.reshape(-1)
        return amp.real**2 + amp.imag**2

    def __call__(self, theta: Sequence[float]) -> np.ndarray:
        probs = self.exact(theta)
        if not self.shots:
            return probs
        rng = np.random.default_rng([self._seed, self._draws])
        self._draws += 1
        return sample_counts(probs, self.shots, rng) / self.shots

    @property
    def param_count(self) -> int:
        return self.ansatz.param_count


def gradient(
    cost: str,
    fragments: FragmentPair,
    theta: Sequence[float],
    method: str = "parameter_shift",
    upstream_pattern: str | None = None,
    bindings: Mapping[str, float] | None = None,
    fd_step: float = 1e-4,
    prob_fn: UpstreamProbabilityFn | None = None,
    base_probs: np.ndarray | None = None,
) -> np.ndarray:
    """Gradient of the chosen cost with respect to the rotation parameters."""
    if cost not in COSTS:
        raise OptimizationError(f"unknown cost {cost!r}; choose from {sorted(COSTS)}")
    cost_fn, grad_fn = COSTS[cost]
    f = prob_fn or UpstreamProbabilityFn(fragments, upstream_pattern, bindings)
    theta = np.asarray(theta, dtype=float)
    grads = np.zeros_like(theta)
    if method == "parameter_shift":
        dc_dp = grad_fn(f(theta) if base_probs is None else np.asarray(base_probs))
        for j in range(len(theta)):
            shifted = theta.copy()
            shifted[j] += np.pi / 2
            p_plus = f(shifted)
            shifted[j] -= np.pi
            p_minus = f(shifted)
            grads[j] = dc_dp @ (p_plus - p_minus) / 2.0
    elif method == "finite_difference":
        for j in range(len(theta)):
            shifted = theta.copy()
            shifted[j] += fd_step
            c_plus = cost_fn(f(shifted))
            shifted[j] -= 2 * fd_step
            c_minus = cost_fn(f(shifted))
            grads[j] = (c_plus - c_minus) / (2 * fd_step)
    else:
        raise OptimizationError(f"unknown gradient method {method!r}")
    return grads


# --- Adam --------------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    t: int = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class OptimizerConfig:
    eps: float = 1e-7
    max_inner_iters: int = 500
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    lr_decay: float = 1.0
    cost: str = "alignment"
    gradient_method: str = "parameter_shift"
    fd_step: float = 1e-4
    mode: str = "exact"
    shots: int = 0
    seed: int = 0
    smoothing_window: int = 5

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


@dataclass
class OptimizationTrace:
    costs: list[float] = field(default_factory=list)
    executions_cum: list[int] = field(default_factory=list)
    ledger: ExecutionLedger = field(default_factory=lambda: ExecutionLedger(phase="optimization"))
    theta: np.ndarray | None = None
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.costs)

    def to_json_lines(self) -> str:
        import json

        lines = [
            json.dumps({"iter": i, "cost": c, "executions_cum": e})
            for i, (c, e) in enumerate(zip(self.costs, self.executions_cum))
        ]
        return "\n".join(lines) + "\n"


def ricco_optimize(
    fragments: FragmentPair,
    observable_group,
    ansatz: RiccoAnsatz | None = None,
    config: OptimizerConfig = OptimizerConfig(),
    warm_start: Sequence[float] | None = None,
) -> tuple[np.ndarray, OptimizationTrace]:
    """Optimize the cut rotation for one observable group.

    `observable_group` supplies the upstream basis rotations: either a
    pattern string over the non-cut upstream wires or an object with a
    `.key` attribute holding one. Executions are tallied as one per cost
    evaluation plus two per parameter per gradient step.
    """
    ansatz = ansatz or fragments.require_ansatz()
    pattern = getattr(observable_group, "key", observable_group)
    if pattern is not None and not isinstance(pattern, str):
        pattern = str(pattern)
    if config.cost not in COSTS:
        raise OptimizationError(f"unknown cost {config.cost!r}")
    cost_fn, _ = COSTS[config.cost]

    shots = config.shots if config.mode == "shots" else 0
    if config.mode == "shots" and shots <= 0:
        raise OptimizationError("shots mode requires shots > 0")
    f = UpstreamProbabilityFn(fragments, pattern, shots=shots, seed=config.seed)

    rng = np.random.default_rng([config.seed, 0x0517])
    if warm_start is not None:
        theta = np.asarray(warm_start, dtype=float).copy()
        if theta.shape != (ansatz.param_count,):
            raise OptimizationError(f"warm start has {theta.shape}, need {ansatz.param_count}")
    else:
        theta = ansatz.initial_theta(rng)

    adam = AdamState(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.adam_eps)
    trace = OptimizationTrace()
    smoothed: list[float] = []

    for it in range(config.max_inner_iters):
        probs = f(theta)
        cost = cost_fn(probs)
        trace.ledger.add(1, shots)
        if not np.isfinite(cost):
            trace.theta = theta
            trace.executions_cum.append(trace.ledger.distinct_circuits)
            raise OptimizationError(f"non-finite cost at iteration {it}", trace)
        trace.costs.append(cost)

        if config.mode == "shots":
            w = config.smoothing_window
            smoothed.append(float(np.mean(trace.costs[-w:])))
            if len(smoothed) >= 2 and it >= w:
                if abs(smoothed[-2] - smoothed[-1]) <= config.eps:
                    trace.converged = True
                    trace.executions_cum.append(trace.ledger.distinct_circuits)
                    break
        elif it >= 1 and abs(trace.costs[-2] - trace.costs[-1]) <= config.eps:
            trace.converged = True
            trace.executions_cum.append(trace.ledger.distinct_circuits)
            break

        grad = gradient(
            config.cost,
            fragments,
            theta,
            method=config.gradient_method,
            fd_step=config.fd_step,
            prob_fn=f,
            base_probs=probs if config.gradient_method == "parameter_shift" else None,
        )
        trace.ledger.add(2 * ansatz.param_count, 2 * ansatz.param_count * shots)
        trace.executions_cum.append(trace.ledger.distinct_circuits)
        theta = adam.step(theta, grad)
        adam.lr *= config.lr_decay

    trace.theta = theta
    return theta, trace
