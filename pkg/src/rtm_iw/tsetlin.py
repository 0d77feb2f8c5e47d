"""Tsetlin automata teams: literal vectors, include/exclude states and clause logic.

Literals, clauses and automata are indexed from 0. For ``o`` input bits the
literal vector is ``[x_0, ..., x_{o-1}, not x_0, ..., not x_{o-1}]`` so literal
``k >= o`` is the negation of input ``k - o``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an input vector, dataset or configuration is malformed."""


def augment_literals(x) -> np.ndarray:
    """Return ``[x, 1 - x]`` as a uint8 literal vector of length ``2 * len(x)``.

    Also accepts a 2-D array of samples, augmenting each row.
    """
    arr = np.asarray(x)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise InvalidInputError(f"inputs must be binary, got values {np.unique(arr)[:8]}")
    arr = arr.astype(np.uint8)
    return np.concatenate([arr, 1 - arr], axis=-1)


@dataclass
class TAStateMatrix:
    """States of an ``m x 2o`` team of automata with ``2N`` states each.

    States ``1..N`` mean *exclude*, ``N+1..2N`` mean *include*.
    """

    states: np.ndarray
    n_states: int = 100

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int32)
        if self.states.ndim != 2 or self.states.shape[1] % 2:
            raise InvalidInputError(f"state matrix must be m x 2o, got shape {self.states.shape}")
        if self.n_states < 1:
            raise InvalidInputError("n_states must be positive")
        if self.states.size and (self.states.min() < 1 or self.states.max() > 2 * self.n_states):
            raise InvalidInputError(f"states must lie in [1, {2 * self.n_states}]")

    @classmethod
    def initial(cls, m: int, o: int, n_states: int = 100, init: str = "boundary", rng=None):
        """Fresh team. ``init="boundary"`` puts every automaton at state N (weakest
        exclude); ``init="random"`` draws each state from {N, N+1}."""
        if m < 1 or o < 1:
            raise InvalidInputError(f"need m >= 1 and o >= 1, got m={m}, o={o}")
        if init == "boundary":
            states = np.full((m, 2 * o), n_states, dtype=np.int32)
        elif init == "random":
            rng = np.random.default_rng() if rng is None else rng
            states = n_states + rng.integers(0, 2, size=(m, 2 * o), dtype=np.int32)
        else:
            raise InvalidInputError(f"unknown TA initialization {init!r}")
        return cls(states, n_states)

    @property
    def m(self) -> int:
        return self.states.shape[0]

    @property
    def o(self) -> int:
        return self.states.shape[1] // 2

    def include_mask(self) -> np.ndarray:
        return self.states > self.n_states

    def copy(self) -> "TAStateMatrix":
        return TAStateMatrix(self.states.copy(), self.n_states)


@dataclass
class FeedbackSets:
    """Boolean ``m x 2o`` masks selecting the automata that receive Type Ia,
    Type Ib and Type II feedback in one training step."""

    ia: np.ndarray
    ib: np.ndarray
    ii: np.ndarray

    @classmethod
    def empty(cls, m: int, n_literals: int) -> "FeedbackSets":
        z = np.zeros((m, n_literals), dtype=bool)
        return cls(z, z.copy(), z.copy())

    def pairs(self, which: str) -> set[tuple[int, int]]:
        """The selected ``(clause, literal)`` pairs of one mask, as a set."""
        mask = getattr(self, which)
        return {(int(j), int(k)) for j, k in zip(*np.nonzero(mask))}


def include_set(A: TAStateMatrix, j: int) -> set[int]:
    if not 0 <= j < A.m:
        raise IndexError(f"clause index {j} out of range for m={A.m}")
    return {int(k) for k in np.flatnonzero(A.states[j] > A.n_states)}


def evaluate_clause(include, L, empty_output: int = 1) -> int:
    """Conjunction of the literals of ``L`` listed in ``include``.

    An empty clause is the empty product and outputs ``empty_output`` (1 by
    default).
    """
    include = list(include)
    if not include:
        return int(empty_output)
    L = np.asarray(L)
    return int(all(L[k] == 1 for k in include))


def clause_outputs(include: np.ndarray, L: np.ndarray, empty_output: int = 1) -> np.ndarray:
    """Vectorised clause evaluation.

    ``include`` is an ``m x 2o`` boolean mask, ``L`` either one literal vector
    or a ``n x 2o`` batch. Returns ``m`` (or ``n x m``) outputs in {0, 1}.
    """
    L = np.asarray(L)
    violated = include & (L[..., None, :] == 0)
    out = (~violated.any(axis=-1)).astype(np.uint8)
    if not empty_output:
        out &= include.any(axis=1).astype(np.uint8)
    return out


def apply_feedback(A: TAStateMatrix, fb: FeedbackSets, inplace: bool = False) -> TAStateMatrix:
    """Increment automata in ``ia`` and ``ii``, decrement those in ``ib``,
    saturating at 1 and 2N."""
    target = A if inplace else A.copy()
    delta = fb.ia.astype(np.int32) + fb.ii.astype(np.int32) - fb.ib.astype(np.int32)
    np.clip(target.states + delta, 1, 2 * A.n_states, out=target.states)
    return target
