"""Regression Tsetlin Machine with unity, integer and real clause weights.

The model output for a literal vector ``L`` is ``clamp(sum_j w_j c_j / T, 0, 1)``
mapped back to target units. Training processes one sample at a time:

* Type I feedback when the output is below the target, Type II when above;
* each clause is activated for feedback with probability equal to the
  normalized absolute error;
* integer weights move by +/-1 on activated clauses (increment only if the
  clause fired), never dropping below zero;
* the real-weight baseline scales weights by ``1 +/- alpha`` instead.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .datagen import Dataset, Normalizer
from .metrics import mae
from .tsetlin import (
    FeedbackSets,
    InvalidInputError,
    TAStateMatrix,
    apply_feedback,
    augment_literals,
    clause_outputs,
)


class Variant(str, enum.Enum):
    RTM = "rtm"
    RTM_IW = "rtm-iw"
    RTM_RW = "rtm-rw"

    @property
    def weight_kind(self) -> str:
        return {"rtm": "unity", "rtm-iw": "integer", "rtm-rw": "real"}[self.value]


class FeedbackType(enum.Enum):
    TYPE_I = 1
    TYPE_II = 2


@dataclass
class WeightVector:
    kind: str
    w: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("unity", "integer", "real"):
            raise InvalidInputError(f"unknown weight kind {self.kind!r}")
        if self.kind == "unity":
            self.w = None
            return
        dtype = np.int64 if self.kind == "integer" else np.float64
        self.w = np.asarray(self.w, dtype=dtype)
        if (self.w < 0).any():
            raise InvalidInputError("clause weights must be non-negative")

    @classmethod
    def initial(cls, kind: str, m: int) -> "WeightVector":
        if kind == "integer":
            return cls(kind, np.zeros(m, dtype=np.int64))
        if kind == "real":
            return cls(kind, np.ones(m))
        return cls(kind)

    def values(self, m: int) -> np.ndarray:
        """Weights as a float array, materialising the implicit ones."""
        if self.w is None:
            return np.ones(m)
        return self.w.astype(np.float64)

    def copy(self) -> "WeightVector":
        return WeightVector(self.kind, None if self.w is None else self.w.copy())


@dataclass
class RtmModel:
    ta: TAStateMatrix
    weights: WeightVector
    T: int
    s: float
    variant: Variant
    normalizer: Normalizer
    alpha: float = 0.01
    decrement_requires_fire: bool = False
    rw_rule: str = "multiplicative"
    # output of a clause with no included literals, at inference only
    empty_clause_output: int = 1

    def __post_init__(self):
        self.variant = Variant(self.variant)
        if self.T < 1:
            raise InvalidInputError(f"T must be >= 1, got {self.T}")
        if self.s < 1:
            raise InvalidInputError(f"s must be >= 1, got {self.s}")
        if self.variant is Variant.RTM_RW and not self.alpha > 0:
            raise InvalidInputError("alpha must be positive for rtm-rw")
        if self.rw_rule not in ("multiplicative", "additive"):
            raise InvalidInputError(f"unknown rw_rule {self.rw_rule!r}")
        if self.weights.kind != self.variant.weight_kind:
            raise InvalidInputError(f"{self.variant.value} needs {self.variant.weight_kind} weights")
        if self.weights.w is not None and len(self.weights.w) != self.ta.m:
            raise InvalidInputError("one weight per clause required")

    @classmethod
    def create(cls, variant, m: int, o: int, T: int, s: float = 2.0, n_states: int = 100,
               normalizer: Normalizer | None = None, ta_init: str = "boundary", rng=None,
               **options) -> "RtmModel":
        variant = Variant(variant)
        return cls(
            ta=TAStateMatrix.initial(m, o, n_states, ta_init, rng),
            weights=WeightVector.initial(variant.weight_kind, m),
            T=T,
            s=s,
            variant=variant,
            normalizer=normalizer or Normalizer.for_bits(o),
            **options,
        )

    @property
    def m(self) -> int:
        return self.ta.m

    @property
    def o(self) -> int:
        return self.ta.o

    def weight_values(self) -> np.ndarray:
        return self.weights.values(self.m)

    def include_sets(self) -> list[list[int]]:
        return [np.flatnonzero(row).tolist() for row in self.ta.include_mask()]

    def copy(self) -> "RtmModel":
        return RtmModel(
            self.ta.copy(), self.weights.copy(), self.T, self.s, self.variant, self.normalizer,
            self.alpha, self.decrement_requires_fire, self.rw_rule, self.empty_clause_output,
        )


@dataclass
class StepTrace:
    c: np.ndarray
    P: np.ndarray
    feedback: FeedbackType | None
    raw: float
    y_norm: float
    target_norm: float


@dataclass
class RunReport:
    train_mae: list[float] = field(default_factory=list)
    test_mae: list[float] = field(default_factory=list)
    initial_train_mae: float = float("nan")
    initial_test_mae: float = float("nan")
    weights: np.ndarray | None = None
    include_sets: list[list[int]] = field(default_factory=list)
    wall_clock: float = 0.0
    seed: int | None = None

    @property
    def epochs(self) -> int:
        return len(self.train_mae)

    @property
    def final_train_mae(self) -> float:
        return self.train_mae[-1] if self.train_mae else self.initial_train_mae

    @property
    def final_test_mae(self) -> float:
        return self.test_mae[-1] if self.test_mae else self.initial_test_mae


# --- inference --------------------------------------------------------------


def _check_width(model: RtmModel, n_lit: int):
    if n_lit != 2 * model.o:
        raise InvalidInputError(
            f"feature width mismatch: model expects {model.o} inputs, got {n_lit // 2}")


def predict_raw(model: RtmModel, L, *, training: bool = False):
    """Weighted vote sum of the clauses that fire on literal vector ``L``."""
    L = np.asarray(L)
    _check_width(model, L.shape[-1])
    empty = 1 if training else model.empty_clause_output
    c = clause_outputs(model.ta.include_mask(), L, empty)
    if model.weights.kind == "unity":
        return int(c.sum())
    total = c.astype(model.weights.w.dtype) @ model.weights.w
    return total.item() if np.ndim(total) == 0 else total


def _normalized_output(raw, T):
    return np.clip(np.asarray(raw, dtype=np.float64) / T, 0.0, 1.0)


def predict(model: RtmModel, x) -> float:
    """Prediction for one binary input vector, in target units."""
    raw = predict_raw(model, augment_literals(x))
    return float(model.normalizer.denormalize(_normalized_output(raw, model.T)))


def predict_batch(model: RtmModel, X) -> np.ndarray:
    """Predictions for the rows of ``X``. Distinct rows are evaluated once."""
    X = np.asarray(X, dtype=np.uint8)
    if len(X) == 0:
        return np.empty(0)
    patterns, inverse = np.unique(X, axis=0, return_inverse=True)
    L = augment_literals(patterns)
    _check_width(model, L.shape[-1])
    c = clause_outputs(model.ta.include_mask(), L, model.empty_clause_output)
    raw = c @ model.weight_values()
    out = model.normalizer.denormalize(_normalized_output(raw, model.T))
    return out[inverse.reshape(-1)]


# --- feedback ---------------------------------------------------------------


def feedback_type(y_norm: float, target_norm: float) -> FeedbackType | None:
    if y_norm < target_norm:
        return FeedbackType.TYPE_I
    if y_norm > target_norm:
        return FeedbackType.TYPE_II
    return None


def activation_probability(y_norm: float, target_norm: float) -> float:
    return min(max(abs(y_norm - target_norm), 0.0), 1.0)


def clause_activation(y_norm: float, target_norm: float, m: int, rng) -> np.ndarray:
    """Mask of clauses selected for feedback, each independently with
    probability ``|y - target|``."""
    return (rng.random(m) < activation_probability(y_norm, target_norm)).astype(np.uint8)


def select_type_ia(c, P, L) -> np.ndarray:
    c, P, L = (np.asarray(a, dtype=bool) for a in (c, P, L))
    return (c & P)[:, None] & L[None, :]


def select_type_ib(c, P, L, s: float, rng) -> np.ndarray:
    """Automata pushed towards exclude: literal is 0 or clause is 0, clause
    activated, and a coin with probability ``1/s`` comes up.

    One coin is drawn per literal of each activated clause, in clause order.
    """
    c, P, L = (np.asarray(a, dtype=bool) for a in (c, P, L))
    candidates = (~L[None, :] | ~c[:, None]) & P[:, None]
    q = np.zeros(candidates.shape, dtype=bool)
    rows = np.flatnonzero(P)
    q[rows] = rng.random((len(rows), len(L))) < 1.0 / s
    return candidates & q


def select_type_ii(c, P, L) -> np.ndarray:
    c, P, L = (np.asarray(a, dtype=bool) for a in (c, P, L))
    return (c & P)[:, None] & ~L[None, :]


def update_weights_integer(w, y_norm, target_norm, c, P, requires_fire: bool = False):
    w = np.array(w, dtype=np.int64)
    c = np.asarray(c, dtype=bool)
    P = np.asarray(P, dtype=bool)
    if y_norm < target_norm:
        w[c & P] += 1
    elif y_norm > target_norm:
        dec = P & (w > 0)
        if requires_fire:
            dec &= c
        w[dec] -= 1
    return w


def update_weights_real(w, y_norm, target_norm, c, P, alpha: float,
                        rule: str = "multiplicative", requires_fire: bool = False):
    w = np.array(w, dtype=np.float64)
    c = np.asarray(c, dtype=bool)
    P = np.asarray(P, dtype=bool)
    if y_norm < target_norm:
        inc = c & P
        w[inc] = w[inc] * (1.0 + alpha) if rule == "multiplicative" else w[inc] + alpha
    elif y_norm > target_norm:
        dec = P & (w > 0)
        if requires_fire:
            dec &= c
        if rule == "multiplicative":
            w[dec] = w[dec] * (1.0 - alpha)
        else:
            w[dec] = np.maximum(w[dec] - alpha, 0.0)
    return w


# --- training ---------------------------------------------------------------


def train_step(model: RtmModel, x, target_norm: float, rng) -> StepTrace:
    """One online update on sample ``(x, target_norm)``; mutates ``model``.

    Weights and automata are both updated from the same pre-step clause
    outputs and activation mask.
    """
    L = augment_literals(x)
    _check_width(model, len(L))
    m = model.m
    c = clause_outputs(model.ta.include_mask(), L, 1)
    raw = float(c @ model.weight_values())
    y = float(_normalized_output(raw, model.T))
    fb = feedback_type(y, target_norm)
    if fb is None:
        return StepTrace(c, np.zeros(m, dtype=np.uint8), None, raw, y, target_norm)

    P = clause_activation(y, target_norm, m, rng)
    sets = FeedbackSets.empty(m, len(L))
    if fb is FeedbackType.TYPE_I:
        sets.ia = select_type_ia(c, P, L)
        sets.ib = select_type_ib(c, P, L, model.s, rng)
    else:
        sets.ii = select_type_ii(c, P, L)

    kind = model.weights.kind
    if kind == "integer":
        model.weights.w = update_weights_integer(
            model.weights.w, y, target_norm, c, P, model.decrement_requires_fire)
    elif kind == "real":
        model.weights.w = update_weights_real(
            model.weights.w, y, target_norm, c, P, model.alpha, model.rw_rule,
            model.decrement_requires_fire)
    apply_feedback(model.ta, sets, inplace=True)
    return StepTrace(c, P, fb, raw, y, target_norm)


def _weight_mode(model: RtmModel) -> int:
    if model.weights.kind == "unity":
        return _kernels.WEIGHTS_UNITY
    if model.weights.kind == "integer":
        return _kernels.WEIGHTS_INTEGER
    if model.rw_rule == "multiplicative":
        return _kernels.WEIGHTS_REAL_MULT
    return _kernels.WEIGHTS_REAL_ADD


def train_epoch(model: RtmModel, literals: np.ndarray, targets: np.ndarray, order: np.ndarray,
                rng, engine: str = "compiled") -> None:
    """Run one pass over ``order``. ``engine="python"`` uses :func:`train_step`
    and produces the same result as the compiled loop for the same ``rng``."""
    if engine == "python":
        o = model.o
        for i in order:
            train_step(model, literals[i, :o], float(targets[i]), rng)
        return
    if engine != "compiled":
        raise InvalidInputError(f"unknown engine {engine!r}")
    w = model.weight_values()
    _kernels.train_epoch(
        model.ta.states, w, literals, targets, order.astype(np.int64), float(model.T),
        1.0 / model.s, model.ta.n_states, _weight_mode(model), float(model.alpha),
        model.decrement_requires_fire, rng,
    )
    if model.weights.kind == "integer":
        model.weights.w = np.rint(w).astype(np.int64)
    elif model.weights.kind == "real":
        model.weights.w = w


def fit(model: RtmModel, train: Dataset, test: Dataset | None, epochs: int, rng,
        engine: str = "compiled", shuffle: bool = True, on_epoch=None) -> RunReport:
    """Train for ``epochs`` passes and record per-epoch MAE in target units.

    The sample order is reshuffled from ``rng`` at the start of every epoch.
    ``on_epoch(epoch, train_mae, test_mae)`` is called after each pass.
    """
    if len(train) == 0:
        raise InvalidInputError("empty training set")
    if test is not None and len(test) == 0:
        raise InvalidInputError("empty test set")
    if train.n_bits != model.o:
        raise InvalidInputError(
            f"feature width mismatch: model expects {model.o} inputs, dataset has {train.n_bits}")
    if epochs < 0:
        raise InvalidInputError("epochs must be >= 0")
    test = train if test is None else test
    started = time.perf_counter()
    literals = np.ascontiguousarray(train.literals())
    targets = np.ascontiguousarray(model.normalizer.normalize(train.y))

    def evaluate():
        return (mae(predict_batch(model, train.X), train.y),
                mae(predict_batch(model, test.X), test.y))

    report = RunReport()
    report.initial_train_mae, report.initial_test_mae = evaluate()
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(train)) if shuffle else np.arange(len(train))
        train_epoch(model, literals, targets, order, rng, engine)
        tr, te = evaluate()
        report.train_mae.append(tr)
        report.test_mae.append(te)
        if on_epoch is not None:
            on_epoch(epoch, tr, te)
    report.weights = model.weight_values()
    report.include_sets = model.include_sets()
    report.wall_clock = time.perf_counter() - started
    return report
