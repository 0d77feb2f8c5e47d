"""Stochastic point location on a discretised unit interval.

A learner walks the grid ``{0, 1/N, ..., 1}`` one step at a time, guided by an
environment that points towards the unknown target with probability ``p``.
The position is stored as an integer grid index so the walk never drifts off
the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tsetlin import InvalidInputError


@dataclass(frozen=True)
class SplState:
    index: int
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise InvalidInputError("n_steps must be positive")
        if not 0 <= self.index <= self.n_steps:
            raise InvalidInputError(f"grid index {self.index} outside [0, {self.n_steps}]")

    @classmethod
    def at(cls, lam: float, n_steps: int) -> "SplState":
        """State at ``lam``, which must lie on the grid (to within 1e-9)."""
        scaled = lam * n_steps
        index = round(scaled)
        if not math.isclose(scaled, index, abs_tol=1e-9):
            raise InvalidInputError(f"lambda={lam} is not a multiple of 1/{n_steps}")
        return cls(index, n_steps)

    @property
    def lam(self) -> float:
        return self.index / self.n_steps


@dataclass(frozen=True)
class SplEnvironment:
    lambda_star: float
    p: float

    def __post_init__(self):
        if not 0.0 <= self.lambda_star <= 1.0:
            raise InvalidInputError("lambda_star must lie in [0, 1]")
        if not 0.5 < self.p <= 1.0:
            raise InvalidInputError(f"environment must be informative (0.5 < p <= 1), got {self.p}")

    def signal(self, state: SplState, rng) -> int:
        """1 = "go right", 0 = "go left". Exactly at the target the advice is a
        fair coin."""
        gap = self.lambda_star * state.n_steps - state.index
        if math.isclose(gap, 0.0, abs_tol=1e-9):
            return int(rng.random() < 0.5)
        correct = 1 if gap > 0 else 0
        return correct if rng.random() < self.p else 1 - correct


def spl_step(state: SplState, e: int) -> SplState:
    if e:
        return SplState(min(state.index + 1, state.n_steps), state.n_steps)
    return SplState(max(state.index - 1, 0), state.n_steps)


def spl_run(env: SplEnvironment, init: SplState, steps: int, rng) -> np.ndarray:
    """Trajectory of ``steps`` updates, starting value included (length ``steps + 1``)."""
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    out = np.empty(steps + 1)
    state = init
    out[0] = state.lam
    for n in range(1, steps + 1):
        state = spl_step(state, env.signal(state, rng))
        out[n] = state.lam
    return out
