"""Fixed-step explicit ODE integration, differentiable through the tape.

States only need `+` with each other and multiplication by a float, so a plain
Tensor and an AugmentedState both integrate.
"""

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple, TypeVar

import numpy as np

from .autodiff import Tensor
from .config import SOLVER_METHODS
from .errors import ConfigError, DivergenceError

State = TypeVar("State")
VectorField = Callable[[float, State], State]


@dataclass(frozen=True)
class SolverConfig:
    method: str = "rk4"
    steps_per_unit: int = 1

    def __post_init__(self):
        if self.method not in SOLVER_METHODS:
            raise ConfigError(f"Solver method must be one of {SOLVER_METHODS}, got {self.method!r}")
        if isinstance(self.steps_per_unit, bool) or not isinstance(self.steps_per_unit, int) or self.steps_per_unit < 1:
            raise ConfigError(f"steps_per_unit must be a positive integer, got {self.steps_per_unit!r}")

    def num_steps(self, t0: float, t1: float) -> int:
        steps = int(round((t1 - t0) * self.steps_per_unit))
        if steps < 1:
            raise ConfigError(f"Integration span [{t0}, {t1}] gives no solver steps")
        return steps


def _arrays(state) -> Iterable[np.ndarray]:
    if isinstance(state, Tensor):
        return (state.data,)
    return state.arrays()


def _is_finite(state) -> bool:
    return all(np.all(np.isfinite(a)) for a in _arrays(state))


def euler_step(field: VectorField, t: float, state: State, dt: float) -> State:
    return state + dt * field(t, state)


def rk4_step(field: VectorField, t: float, state: State, dt: float, t_end: Optional[float] = None) -> State:
    half = 0.5 * dt
    t_mid = t + half
    t_next = t + dt if t_end is None else min(t + dt, t_end)
    k1 = field(t, state)
    k2 = field(t_mid, state + half * k1)
    k3 = field(t_mid, state + half * k2)
    k4 = field(t_next, state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    field: VectorField,
    state0: State,
    t_span: Tuple[float, float],
    cfg: SolverConfig,
) -> State:
    """Integrate from t_span[0] to t_span[1] and return the final state.

    Step times are t0 + k*dt; stage times never pass t1. Raises DivergenceError
    naming the step once the state turns non-finite.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    steps = cfg.num_steps(t0, t1)
    dt = (t1 - t0) / steps

    state = state0
    for k in range(steps):
        t = t0 + k * dt
        if cfg.method == "euler":
            state = euler_step(field, t, state, dt)
        else:
            state = rk4_step(field, t, state, dt, t_end=t1)

        if not _is_finite(state):
            raise DivergenceError(f"Solver state became non-finite at step {k + 1}/{steps} (t={t + dt:.4g})")
    return state
