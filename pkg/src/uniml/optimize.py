"""First-order and stochastic optimizers behind one substitutable contract.

An optimizer is any object with ``optimize(objective, x0) ->
OptimizationResult``; consumers (logistic regression, the CLI) never
depend on a concrete optimizer type.

Objectives are duck-typed too:

* full objective: ``dimension``, ``evaluate(x)``, ``gradient(x)``.
* separable objective (for SGD/Adam): additionally ``num_terms``,
  ``evaluate_term(x, i)``, ``gradient_term(x, i)``, where the per-term
  values sum to ``evaluate(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError

__all__ = [
    "OptimizerConfig",
    "OptimizationResult",
    "GradientDescent",
    "SGD",
    "Adam",
    "SimulatedAnnealing",
    "optimizer_from_name",
    "finite_difference_gradient",
    "SphereObjective",
    "RosenbrockObjective",
]


@dataclass(frozen=True)
class OptimizerConfig:
    """Shared knobs: constant step size, iteration/epoch budget, absolute
    objective-change stopping threshold, and the RNG seed used by the
    stochastic methods."""

    step_size: float = 0.01
    max_iterations: int = 10000
    tolerance: float = 1e-8
    seed: int = 42

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass
class OptimizationResult:
    final_point: np.ndarray
    final_objective: float
    iterations_used: int
    converged: bool


def _start_point(objective, x0) -> np.ndarray:
    x = np.array(x0, dtype=np.float64)
    if x.ndim != 1 or x.size != objective.dimension:
        raise ValueError(
            f"start point has dimension {x.size}, objective wants {objective.dimension}"
        )
    return x


def _checked_eval(objective, x, iteration):
    value = float(objective.evaluate(x))
    if not math.isfinite(value):
        raise NonFiniteError("objective evaluated to a non-finite value", iteration)
    return value


def _checked_grad(grad_fn, x, iteration, *term):
    g = np.asarray(grad_fn(x, *term), dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise NonFiniteError("gradient contains non-finite entries", iteration)
    return g


class GradientDescent:
    """Fixed-step descent: x <- x - step * grad(x).

    Stops when the absolute objective change drops below the tolerance
    (converged) or the iteration budget runs out.
    """

    name = "gd"

    def __init__(self, config: OptimizerConfig = OptimizerConfig()):
        self.config = config

    def optimize(self, objective, x0) -> OptimizationResult:
        cfg = self.config
        x = _start_point(objective, x0)
        prev = _checked_eval(objective, x, 0)
        current = prev
        converged = False
        iterations = 0
        for iterations in range(1, cfg.max_iterations + 1):
            g = _checked_grad(objective.gradient, x, iterations)
            x = x - cfg.step_size * g
            current = _checked_eval(objective, x, iterations)
            if abs(current - prev) < cfg.tolerance:
                converged = True
                break
            prev = current
        return OptimizationResult(x, current, iterations, converged)


class _StochasticBase:
    """Shared epoch loop: seeded reshuffle of term order every epoch,
    stopping on the epoch-level objective change."""

    def __init__(self, config: OptimizerConfig = OptimizerConfig()):
        self.config = config

    def optimize(self, objective, x0) -> OptimizationResult:
        cfg = self.config
        if getattr(objective, "num_terms", 0) < 1:
            raise ValueError("stochastic optimizers need a separable objective with num_terms >= 1")
        x = _start_point(objective, x0)
        rng = np.random.default_rng(cfg.seed)
        state = self._init_state(x.size)
        prev = _checked_eval(objective, x, 0)
        current = prev
        converged = False
        epoch = 0
        for epoch in range(1, cfg.max_iterations + 1):
            for term in rng.permutation(objective.num_terms):
                g = _checked_grad(objective.gradient_term, x, epoch, int(term))
                x = self._step(x, g, state)
            current = _checked_eval(objective, x, epoch)
            if abs(current - prev) < cfg.tolerance:
                converged = True
                break
            prev = current
        return OptimizationResult(x, current, epoch, converged)

    def _init_state(self, dim):
        return None

    def _step(self, x, g, state):
        raise NotImplementedError


class SGD(_StochasticBase):
    """Plain stochastic gradient descent over the objective's terms."""

    name = "sgd"

    def _step(self, x, g, state):
        return x - self.config.step_size * g


class Adam(_StochasticBase):
    """Adam with bias-corrected first and second moments.

    beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8 unless overridden.
    """

    name = "adam"

    def __init__(self, config: OptimizerConfig = OptimizerConfig(), beta1=0.9, beta2=0.999, epsilon=1e-8):
        super().__init__(config)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)

    def _init_state(self, dim):
        return {"m": np.zeros(dim), "v": np.zeros(dim), "t": 0}

    def _step(self, x, g, state):
        state["t"] += 1
        state["m"] = self.beta1 * state["m"] + (1.0 - self.beta1) * g
        state["v"] = self.beta2 * state["v"] + (1.0 - self.beta2) * g * g
        m_hat = state["m"] / (1.0 - self.beta1 ** state["t"])
        v_hat = state["v"] / (1.0 - self.beta2 ** state["t"])
        return x - self.config.step_size * m_hat / (np.sqrt(v_hat) + self.epsilon)


class SimulatedAnnealing:
    """Metropolis search with Gaussian proposals and geometric cooling.

    Proposal scale is the configured step size; temperature starts at
    ``initial_temperature`` and is multiplied by ``cooling`` every
    iteration.  Runs the full iteration budget and returns the best point
    ever visited, so the result never exceeds the starting objective.
    The gradient is never used.
    """

    name = "sa"

    def __init__(self, config: OptimizerConfig = OptimizerConfig(), initial_temperature=1.0, cooling=0.999):
        self.config = config
        self.initial_temperature = float(initial_temperature)
        self.cooling = float(cooling)

    def optimize(self, objective, x0) -> OptimizationResult:
        cfg = self.config
        x = _start_point(objective, x0)
        fx = _checked_eval(objective, x, 0)
        best_x, best_f = x.copy(), fx
        rng = np.random.default_rng(cfg.seed)
        temperature = self.initial_temperature
        for iteration in range(1, cfg.max_iterations + 1):
            proposal = x + rng.normal(0.0, cfg.step_size, size=x.size)
            fp = _checked_eval(objective, proposal, iteration)
            if fp <= fx or rng.random() < math.exp(-(fp - fx) / temperature):
                x, fx = proposal, fp
                if fx < best_f:
                    best_x, best_f = x.copy(), fx
            temperature *= self.cooling
        # Budget-driven stop: there is no tolerance criterion to satisfy.
        return OptimizationResult(best_x, best_f, cfg.max_iterations, False)


_OPTIMIZERS = {"gd": GradientDescent, "sgd": SGD, "adam": Adam, "sa": SimulatedAnnealing}


def optimizer_from_name(name: str, config: OptimizerConfig = OptimizerConfig()):
    """Build a shipped optimizer from its short id (gd, sgd, adam, sa)."""
    key = name.strip().lower()
    if key not in _OPTIMIZERS:
        raise ValueError(f"unknown optimizer {name!r}; valid names: {', '.join(sorted(_OPTIMIZERS))}")
    return _OPTIMIZERS[key](config)


def finite_difference_gradient(objective, x, h: float) -> np.ndarray:
    """Central-difference gradient estimate, (f(x+h e_i) - f(x-h e_i)) / 2h."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        hi = _checked_eval(objective, x + step, None)
        lo = _checked_eval(objective, x - step, None)
        g[i] = (hi - lo) / (2.0 * h)
    return g


class SphereObjective:
    """f(x) = sum(x_i^2); separable with one term per coordinate."""

    def __init__(self, dimension: int):
        self.dimension = int(dimension)
        self.num_terms = self.dimension

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(np.dot(x, x))

    def gradient(self, x):
        return 2.0 * np.asarray(x, dtype=np.float64)

    def evaluate_term(self, x, i):
        return float(x[i] ** 2)

    def gradient_term(self, x, i):
        g = np.zeros(self.dimension)
        g[i] = 2.0 * x[i]
        return g


class RosenbrockObjective:
    """f(x, y) = (a - x)^2 + b (y - x^2)^2; minimum 0 at (a, a^2)."""

    dimension = 2

    def __init__(self, a=1.0, b=100.0):
        self.a = float(a)
        self.b = float(b)

    def evaluate(self, x):
        u, v = float(x[0]), float(x[1])
        return (self.a - u) ** 2 + self.b * (v - u * u) ** 2

    def gradient(self, x):
        u, v = float(x[0]), float(x[1])
        return np.array(
            [
                -2.0 * (self.a - u) - 4.0 * self.b * u * (v - u * u),
                2.0 * self.b * (v - u * u),
            ]
        )
