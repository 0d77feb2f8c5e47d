"""Command-line front end.

Exit status: 0 on success, 1 on usage errors (bad flags, inconsistent inputs),
2 on runtime failures. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bench, datagen
from .datagen import DatasetSpec
from .engine import Variant, predict_batch
from .metrics import mae
from .spl import SplEnvironment, SplState, spl_run
from .tsetlin import InvalidInputError

RUNS_DIR_ENV = "RTM_IW_RUNS_DIR"

TRAIN_DEFAULTS = {
    "variant": "rtm-iw",
    "m": 3,
    "T": None,
    "s": 2.0,
    "n_states": 100,
    "alpha": 0.01,
    "epochs": 200,
    "seeds": [0],
    "ta_init": "boundary",
    "decrement_requires_fire": False,
    "rw_rule": "multiplicative",
    "empty_clause_output": 1,
}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _runs_dir() -> Path:
    return Path(os.environ.get(RUNS_DIR_ENV, "runs"))


def _test_path_for(path: Path) -> Path:
    return path.with_name(f"{path.stem}_test{path.suffix}")


def build_parser() -> Parser:
    p = Parser(prog="rtm-iw", description="Regression Tsetlin Machine with integer-weighted clauses.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    g = sub.add_parser("generate", help="write a synthetic train/test CSV pair")
    g.add_argument("--spec", type=Path, help="DatasetSpec JSON; flags override its values")
    g.add_argument("--dataset-id", choices=list(datagen.NAMED_DATASETS), help="named benchmark dataset")
    g.add_argument("--bits", type=int, help="input width o")
    g.add_argument("--noisy", action="store_true", default=None, help="perturb training targets")
    g.add_argument("--noise-sigma", type=float, help=f"noise std in target units (default {datagen.DEFAULT_NOISE_SIGMA} when noisy)")
    g.add_argument("--n-train", type=int, help="training samples (default 8000)")
    g.add_argument("--n-test", type=int, help="test samples (default 2000)")
    g.add_argument("--seed", type=int, help="generator seed (default 0)")
    g.add_argument("--out", type=Path, required=True, help="training CSV path")
    g.add_argument("--test-out", type=Path, help="test CSV path (default <out stem>_test.csv)")

    t = sub.add_parser("train", help="train one model per seed and write run artifacts")
    t.add_argument("--config", type=Path, help="ExperimentConfig JSON; flags override its values")
    src = t.add_mutually_exclusive_group()
    src.add_argument("--dataset", type=Path, help="training CSV")
    src.add_argument("--dataset-id", choices=list(datagen.NAMED_DATASETS), help="generate a named dataset in memory")
    t.add_argument("--test", type=Path, help="test CSV (default <dataset stem>_test.csv if present, else the training set)")
    t.add_argument("--data-seed", type=int, default=0, help="seed for --dataset-id generation (default 0)")
    t.add_argument("--variant", choices=[v.value for v in Variant], help="rtm, rtm-iw or rtm-rw (default rtm-iw)")
    t.add_argument("--m", type=int, help="number of clauses (default 3)")
    t.add_argument("--T", type=int, help="resolution (default m for rtm, 100*m otherwise)")
    t.add_argument("--s", type=float, help="specificity (default 2.0)")
    t.add_argument("--N", dest="n_states", type=int, help="automaton states per action (default 100)")
    t.add_argument("--alpha", type=float, help="rtm-rw learning rate (default 0.01)")
    t.add_argument("--epochs", type=int, help="training epochs (default 200)")
    t.add_argument("--seed", dest="seeds", type=int, nargs="+", help="one or more training seeds (default 0)")
    t.add_argument("--ta-init", choices=["boundary", "random"], help="initial automaton states (default boundary)")
    t.add_argument("--decrement-requires-fire", action="store_true", default=None,
                   help="only decrement weights of clauses that fired")
    t.add_argument("--rw-rule", choices=["multiplicative", "additive"], help="rtm-rw update rule (default multiplicative)")
    t.add_argument("--empty-clause-output", type=int, choices=[0, 1], help="inference output of empty clauses (default 1)")
    t.add_argument("--workers", type=int, default=1, help="seeds trained in parallel (default 1)")
    t.add_argument("--out", type=Path, help=f"run directory (default ${RUNS_DIR_ENV}/<run name>, ${RUNS_DIR_ENV} defaults to runs)")

    e = sub.add_parser("eval", help="MAE of a saved model on a CSV dataset")
    e.add_argument("--model", type=Path, required=True)
    e.add_argument("--dataset", type=Path, required=True)

    sw = sub.add_parser("sweep", help="grid over variant/m/T/s from a JSON file")
    sw.add_argument("--grid", type=Path, required=True)
    sw.add_argument("--out", type=Path, help="output directory (default $RTM_IW_RUNS_DIR/<grid name>)")
    sw.add_argument("--workers", type=int, default=1, help="grid cells run in parallel (default 1)")

    sp = sub.add_parser("spl-demo", help="stochastic point location trajectory as CSV")
    sp.add_argument("--p", type=float, default=0.9, help="environment correctness probability (default 0.9)")
    sp.add_argument("--lambda-star", type=float, default=0.3, help="target point (default 0.3)")
    sp.add_argument("--N", type=int, default=100, help="grid resolution (default 100)")
    sp.add_argument("--steps", type=int, default=10000, help="number of updates (default 10000)")
    sp.add_argument("--init", type=float, default=0.5, help="starting point (default 0.5)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=Path, help="CSV path (default stdout)")

    r = sub.add_parser("report", help="print the clauses of a saved model")
    r.add_argument("--model", type=Path, required=True)
    r.add_argument("--histogram", action="store_true", help="also print the weight histogram")
    return p


def _merge(flags: argparse.Namespace, keys, base: dict) -> dict:
    out = dict(base)
    for k in keys:
        v = getattr(flags, k, None)
        if v is not None:
            out[k] = v
    return out


def cmd_generate(args) -> int:
    base = json.loads(args.spec.read_text()) if args.spec else {}
    if args.dataset_id:
        base.update(name=args.dataset_id)
    overrides = _merge(args, ["noisy", "noise_sigma", "n_train", "n_test", "seed"], {})
    if args.bits is not None:
        base.pop("name", None)
        overrides["n_bits"] = args.bits
    if "name" not in base and "n_bits" not in base and "n_bits" not in overrides:
        raise UsageError("generate: one of --bits, --dataset-id or --spec is required")
    spec = DatasetSpec.from_json({**base, **overrides})
    train, test = datagen.generate(spec)
    test_out = args.test_out or _test_path_for(args.out)
    datagen.write_csv(train, args.out)
    datagen.write_csv(test, test_out)
    print(f"wrote {len(train)} training samples to {args.out} and {len(test)} test samples to {test_out}",
          file=sys.stderr)
    return 0


def _load_data(args, cfg_data: dict):
    if args.dataset is not None:
        train = datagen.read_csv(args.dataset)
        test_path = args.test or _test_path_for(args.dataset)
        test = datagen.read_csv(test_path) if (args.test or test_path.exists()) else None
        if test is not None and test.n_bits != train.n_bits:
            raise InvalidInputError(
                f"feature width mismatch: training set has {train.n_bits} inputs, test set {test.n_bits}")
        spec = DatasetSpec(n_bits=train.n_bits, n_train=len(train), n_test=len(test or train))
        return train, test if test is not None else train, spec
    if args.dataset_id is not None:
        spec = DatasetSpec.named(args.dataset_id, seed=args.data_seed)
    elif "dataset" in cfg_data:
        spec = DatasetSpec.from_json(cfg_data["dataset"])
    else:
        raise UsageError("train: one of --dataset, --dataset-id or a config with a dataset is required")
    train, test = datagen.generate(spec)
    return train, test, spec


def cmd_train(args) -> int:
    cfg_data = json.loads(args.config.read_text()) if args.config else {}
    train, test, spec = _load_data(args, cfg_data)
    params = _merge(args, TRAIN_DEFAULTS, {**TRAIN_DEFAULTS, **{k: v for k, v in cfg_data.items() if k != "dataset"}})
    cfg = bench.ExperimentConfig.from_dict({**params, "dataset": spec})
    out = args.out or _runs_dir() / cfg.run_name
    result = bench.run_experiment(cfg, train, test, out_dir=out, workers=args.workers)
    for seed, report in result.reports.items():
        print(f"seed {seed}: train MAE {report.final_train_mae:.4f}  test MAE {report.final_test_mae:.4f}")
    best = result.best
    print(f"final train MAE {best.final_train_mae:.4f} / test MAE {best.final_test_mae:.4f} "
          f"(best seed {result.best_seed}); artifacts in {out}")
    return 0


def cmd_eval(args) -> int:
    model = bench.load_model(args.model)
    ds = datagen.read_csv(args.dataset)
    if ds.n_bits != model.o:
        raise InvalidInputError(
            f"feature width mismatch: model expects {model.o} inputs, dataset {args.dataset} has {ds.n_bits}")
    print(f"MAE {mae(predict_batch(model, ds.X), ds.y):.4f} over {len(ds)} samples")
    return 0


def cmd_sweep(args) -> int:
    grid = json.loads(args.grid.read_text())
    out = args.out or _runs_dir() / grid.get("name", args.grid.stem)
    results = bench.run_sweep(grid, out, workers=args.workers)
    for res in results:
        agg = res.aggregate()
        print(f"{res.config.run_name}: best train {agg['best_train_mae']:.4f} test {agg['best_test_mae']:.4f}")
    print(f"summary in {out / 'sweep_summary.csv'}")
    return 0


def cmd_spl_demo(args) -> int:
    env = SplEnvironment(args.lambda_star, args.p)
    traj = spl_run(env, SplState.at(args.init, args.N), args.steps, np.random.default_rng(args.seed))
    fh = args.out.open("w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "lambda"])
        for n, lam in enumerate(traj):
            w.writerow([n, repr(float(lam))])
    finally:
        if args.out:
            fh.close()
    tail = traj[-min(1000, len(traj)):]
    print(f"mean of last {len(tail)} values: {tail.mean():.4f} (target {args.lambda_star})", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    model = bench.load_model(args.model)
    lines = bench.clause_report(model)
    print(f"{model.variant.value}: m={model.m} T={model.T} s={model.s:g}; {len(lines)} active clauses")
    for line in lines:
        print(line)
    if args.histogram and model.weights.kind != "unity":
        for label, count in bench.weight_histogram(model).items():
            print(f"weight {label}: {count}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "spl-demo": cmd_spl_demo,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
