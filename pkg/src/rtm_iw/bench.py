"""Experiment runner: multi-seed training, sweeps and result files.

A run directory holds::

    epoch_metrics.csv   seed,epoch,split,mae   (epoch 0 is the untrained model)
    final_summary.csv   one row per seed plus one aggregate row
    weights_hist.csv    bin,count for the best seed (weighted variants only)
    clauses.txt         clause listing of the best seed
    model.json          best-seed model
    timing.json         wall-clock per seed (kept out of the CSVs so they are
                        byte-reproducible)
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .datagen import Dataset, DatasetSpec, Normalizer, generate
from .engine import RtmModel, RunReport, Variant, WeightVector, fit
from .metrics import mae
from .tsetlin import InvalidInputError, TAStateMatrix

__all__ = [
    "ExperimentConfig", "ExperimentResult", "clause_multiplicities", "clause_report",
    "load_model", "mae", "run_experiment", "run_sweep", "save_model", "train_once",
    "weight_histogram",
]

log = logging.getLogger(__name__)

MODEL_FORMAT = "rtm-iw-model"


@dataclass
class ExperimentConfig:
    dataset: DatasetSpec
    variant: Variant
    m: int
    T: int | None = None
    s: float = 2.0
    n_states: int = 100
    alpha: float = 0.01
    epochs: int = 200
    seeds: list[int] = field(default_factory=lambda: [0])
    name: str | None = None
    ta_init: str = "boundary"
    decrement_requires_fire: bool = False
    rw_rule: str = "multiplicative"
    empty_clause_output: int = 1

    def __post_init__(self):
        self.variant = Variant(self.variant)
        if isinstance(self.dataset, dict):
            self.dataset = DatasetSpec.from_json(self.dataset)
        if self.m < 1:
            raise InvalidInputError("m must be >= 1")
        if self.epochs < 0:
            raise InvalidInputError("epochs must be >= 0")
        if not self.seeds:
            raise InvalidInputError("at least one seed is required")

    @property
    def resolved_T(self) -> int:
        """T if set, else m for the plain RTM and 100 m for weighted variants."""
        if self.T is not None:
            return self.T
        return self.m if self.variant is Variant.RTM else 100 * self.m

    @property
    def run_name(self) -> str:
        return self.name or f"{self.variant.value}_m{self.m}_T{self.resolved_T}_s{self.s:g}"

    def make_model(self, o: int, normalizer: Normalizer | None = None, rng=None) -> RtmModel:
        return RtmModel.create(
            self.variant, self.m, o, self.resolved_T, self.s, self.n_states,
            normalizer=normalizer, ta_init=self.ta_init, rng=rng, alpha=self.alpha,
            decrement_requires_fire=self.decrement_requires_fire, rw_rule=self.rw_rule,
            empty_clause_output=self.empty_clause_output,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reports: dict[int, RunReport]
    models: dict[int, RtmModel]

    @property
    def best_seed(self) -> int:
        return min(self.reports, key=lambda s: (self.reports[s].final_test_mae,
                                                self.reports[s].final_train_mae, s))

    @property
    def best(self) -> RunReport:
        return self.reports[self.best_seed]

    def aggregate(self) -> dict:
        train = [r.final_train_mae for r in self.reports.values()]
        test = [r.final_test_mae for r in self.reports.values()]
        return {
            "mean_train_mae": float(np.mean(train)),
            "mean_test_mae": float(np.mean(test)),
            "median_train_mae": float(np.median(train)),
            "median_test_mae": float(np.median(test)),
            "best_train_mae": float(min(train)),
            "best_test_mae": float(min(test)),
            "best_seed": self.best_seed,
        }

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        cfg = self.config
        with (out / "epoch_metrics.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["seed", "epoch", "split", "mae"])
            for seed, r in self.reports.items():
                curves = {"train": [r.initial_train_mae, *r.train_mae],
                          "test": [r.initial_test_mae, *r.test_mae]}
                for epoch in range(r.epochs + 1):
                    for split, values in curves.items():
                        w.writerow([seed, epoch, split, repr(values[epoch])])
        (out / "final_summary.csv").write_text(self.summary_csv())
        best_model = self.models[self.best_seed]
        if best_model.weights.kind != "unity":
            write_histogram_csv(weight_histogram(best_model), best_model.m, out / "weights_hist.csv")
        (out / "clauses.txt").write_text("".join(f"{line}\n" for line in clause_report(best_model)))
        save_model(best_model, out / "model.json")
        (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, default=str) + "\n")
        timing = {str(s): r.wall_clock for s, r in self.reports.items()}
        (out / "timing.json").write_text(json.dumps(timing, indent=2) + "\n")
        return out

    def summary_csv(self) -> str:
        cfg = self.config
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = [cfg.variant.value, cfg.m, cfg.resolved_T, repr(float(cfg.s)), cfg.epochs]
        w.writerow(["seed", "variant", "m", "T", "s", "epochs", "train_mae", "test_mae",
                    "best_train_mae", "best_test_mae", "best_seed"])
        for seed, r in self.reports.items():
            w.writerow([seed, *head, repr(r.final_train_mae), repr(r.final_test_mae), "", "", ""])
        agg = self.aggregate()
        w.writerow(["aggregate", *head, repr(agg["mean_train_mae"]), repr(agg["mean_test_mae"]),
                    repr(agg["best_train_mae"]), repr(agg["best_test_mae"]), agg["best_seed"]])
        return buf.getvalue()


def train_once(cfg: ExperimentConfig, train: Dataset, test: Dataset, seed: int,
               on_epoch=None) -> tuple[RtmModel, RunReport]:
    rng = np.random.default_rng(seed)
    model = cfg.make_model(train.n_bits, train.normalizer, rng)
    report = fit(model, train, test, cfg.epochs, rng, on_epoch=on_epoch)
    report.seed = seed
    return model, report


def run_experiment(cfg: ExperimentConfig, train: Dataset | None = None, test: Dataset | None = None,
                   out_dir=None, workers: int = 1) -> ExperimentResult:
    """Train one independent model per seed; datasets default to ``cfg.dataset``."""
    if train is None:
        train, test = generate(cfg.dataset)

    def one(seed):
        model, report = train_once(cfg, train, test, seed)
        log.info("%s seed=%s train=%.4f test=%.4f (%.1fs)", cfg.run_name, seed,
                 report.final_train_mae, report.final_test_mae, report.wall_clock)
        return seed, model, report

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, cfg.seeds))
    else:
        results = [one(seed) for seed in cfg.seeds]
    result = ExperimentResult(cfg, {s: r for s, _, r in results}, {s: m for s, m, _ in results})
    if out_dir is not None:
        result.write(out_dir)
    return result


GRID_KEYS = ("variant", "m", "T", "s", "n_states", "alpha")


def expand_grid(grid: dict) -> list[ExperimentConfig]:
    """Cartesian product over the list-valued entries of ``GRID_KEYS``."""
    grid = dict(grid)
    grid.pop("name", None)
    axes = {k: grid.pop(k) for k in GRID_KEYS if isinstance(grid.get(k), list)}
    cells = []
    for values in itertools.product(*axes.values()):
        cells.append(ExperimentConfig.from_dict({**grid, **dict(zip(axes, values))}))
    return cells


def run_sweep(grid: dict, out_dir, workers: int = 1) -> list[ExperimentResult]:
    """Run every grid cell on one shared dataset and write ``sweep_summary.csv``."""
    cells = expand_grid(grid)
    if not cells:
        raise InvalidInputError("empty grid")
    train, test = generate(cells[0].dataset)
    out = Path(out_dir)

    def one(cfg):
        return run_experiment(cfg, train, test, out_dir=out / cfg.run_name)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, cells))
    else:
        results = [one(cfg) for cfg in cells]
    with (out / "sweep_summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "variant", "m", "T", "s", "mean_train_mae", "mean_test_mae",
                    "best_train_mae", "best_test_mae", "best_seed"])
        for res in results:
            cfg, agg = res.config, res.aggregate()
            w.writerow([cfg.run_name, cfg.variant.value, cfg.m, cfg.resolved_T, repr(float(cfg.s)),
                        repr(agg["mean_train_mae"]), repr(agg["mean_test_mae"]),
                        repr(agg["best_train_mae"]), repr(agg["best_test_mae"]), agg["best_seed"]])
    return results


# --- model inspection -------------------------------------------------------


def weight_histogram(model: RtmModel, bin_width: float = 1) -> dict:
    """Clause counts per weight bin.

    Zero-weight (switched off) clauses get their own bin ``0``; a positive
    weight ``w`` falls in the bin labelled ``ceil(w / bin_width) * bin_width``.
    Only populated bins are returned.
    """
    if model.weights.kind == "unity":
        raise InvalidInputError("plain RTM has no clause weights")
    if bin_width <= 0:
        raise InvalidInputError("bin_width must be positive")
    counts = Counter()
    for w in model.weights.w:
        if w == 0:
            counts[0] += 1
        else:
            label = math.ceil(w / bin_width - 1e-12) * bin_width
            counts[int(label) if float(label).is_integer() else label] += 1
    return dict(sorted(counts.items()))


def write_histogram_csv(hist: dict, m: int, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin", "count"])
        w.writerow([0, hist.get(0, 0)])
        for label, count in hist.items():
            if label != 0:
                w.writerow([label, count])


def literal_name(k: int, o: int) -> str:
    return f"x{k + 1}" if k < o else f"¬x{k - o + 1}"


def clause_report(model: RtmModel) -> list[str]:
    """One line per clause with positive weight, e.g. ``"x1 ∧ ¬x3 → w=4"``."""
    weights = model.weight_values()
    lines = []
    for include, w in zip(model.include_sets(), weights):
        if w <= 0:
            continue
        body = " ∧ ".join(literal_name(k, model.o) for k in include) or "⊤"
        shown = f"{w:.3f}" if model.weights.kind == "real" else f"{int(w)}"
        lines.append(f"{body} → w={shown}")
    return lines


def clause_multiplicities(model: RtmModel) -> dict[tuple[int, ...], float]:
    """Total weight per distinct include set: the number of copies of each
    pattern for the plain RTM, the summed weight otherwise."""
    totals: dict[tuple[int, ...], float] = {}
    for include, w in zip(model.include_sets(), model.weight_values()):
        if w > 0:
            totals[tuple(include)] = totals.get(tuple(include), 0) + w
    return totals


# --- persistence ------------------------------------------------------------


def model_to_dict(model: RtmModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": 1,
        "m": model.m,
        "o": model.o,
        "N": model.ta.n_states,
        "T": model.T,
        "s": model.s,
        "variant": model.variant.value,
        "alpha": model.alpha,
        "normalizer": [model.normalizer.lo, model.normalizer.hi],
        "decrement_requires_fire": model.decrement_requires_fire,
        "rw_rule": model.rw_rule,
        "empty_clause_output": model.empty_clause_output,
        "states": model.ta.states.ravel().tolist(),
        "weights": None if model.weights.w is None else model.weights.w.tolist(),
    }


def model_from_dict(data: dict) -> RtmModel:
    if data.get("format") != MODEL_FORMAT:
        raise InvalidInputError("not a model file")
    m, o = data["m"], data["o"]
    states = np.asarray(data["states"], dtype=np.int32)
    if states.size != m * 2 * o:
        raise InvalidInputError(f"expected {m * 2 * o} states, found {states.size}")
    variant = Variant(data["variant"])
    return RtmModel(
        ta=TAStateMatrix(states.reshape(m, 2 * o), data["N"]),
        weights=WeightVector(variant.weight_kind, data["weights"]),
        T=data["T"],
        s=data["s"],
        variant=variant,
        normalizer=Normalizer(*data["normalizer"]),
        alpha=data["alpha"],
        decrement_requires_fire=data["decrement_requires_fire"],
        rw_rule=data["rw_rule"],
        empty_clause_output=data["empty_clause_output"],
    )


def save_model(model: RtmModel, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model)) + "\n")


def load_model(path) -> RtmModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(data)
