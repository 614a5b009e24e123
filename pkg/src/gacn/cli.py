"""Command line: ``gacn {inject,train,impute,eval,sweep}``.

Settings come from an optional JSON config file (``--config``) whose keys are
the :class:`ExperimentConfig` field names; command-line flags override the
file.  Every random stream is derived from ``--seed`` via
:func:`gacn.rng.derive_seed` with a stage label ("inject", "split",
"labels", "train", "impute", ...), so stages are reproducible on their own.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields

import numpy as np

from . import metrics
from .baselines import IntakeError, load_external
from .dataset import (
    Dataset,
    DatasetError,
    SplitSpec,
    denormalize,
    inject_mar,
    load_csv,
    mask_labels,
    normalize,
    split_indices,
    write_csv,
    write_mask_csv,
)
from .experiment import METHODS, run_sweep
from .model import (
    TrainConfig,
    impute,
    init_model,
    load_checkpoint,
    predict_proba,
    save_checkpoint,
    train,
    train_classifier,
)
from .nn_core import ConfigurationError, NumericError
from .rng import derive_rng, derive_seed
from .synthetic import make_benchmark

log = logging.getLogger("gacn")

TRAIN_FIELDS = (
    "alpha",
    "beta",
    "gamma",
    "batch_d",
    "batch_a",
    "batch_g",
    "iterations",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "noise_high",
    "eval_every",
    "hidden_activation",
    "generator_sees_mask",
)


@dataclass
class ExperimentConfig:
    data: str | None = None
    label_column: str | None = "label"
    missing_token: str = ""
    synthetic: bool = False
    p_miss: list = field(default_factory=lambda: [0.2])
    p_labeled: list = field(default_factory=lambda: [1.0])
    mode: str = "gacn"
    methods: list = field(default_factory=lambda: ["gacn", "gain", "mean"])
    split: list = field(default_factory=lambda: [0.7, 0.1, 0.2])
    realizations: int = 50
    level: float = 0.9
    top_k: int = 30
    out_dir: str = "out"
    seed: int = 0
    workers: int = 1
    checkpoint: str | None = None
    completed: str | None = None
    truth: str | None = None
    alpha: float = 10.0
    beta: float = 1.0
    gamma: float = 1000.0
    batch_d: int = 128
    batch_a: int = 128
    batch_g: int = 128
    iterations: int = 1000
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    noise_high: float = 0.01
    eval_every: int = 10
    hidden_activation: str = "relu"
    generator_sees_mask: bool = False

    def problems(self) -> list[str]:
        """Every invalid field, not just the first one."""
        out = []
        if not isinstance(self.p_miss, list) or not self.p_miss:
            out.append("p_miss must be a non-empty list")
        else:
            out += [f"p_miss value {p} outside [0, 1)" for p in self.p_miss if not 0 <= p < 1]
        if not isinstance(self.p_labeled, list) or not self.p_labeled:
            out.append("p_labeled must be a non-empty list")
        else:
            out += [f"p_labeled value {p} outside [0, 1]" for p in self.p_labeled if not 0 <= p <= 1]
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            out.append(f"unknown methods {bad}; choose from {list(METHODS)}")
        if len(self.split) != 3:
            out.append("split needs three fractions (train, validation, test)")
        else:
            try:
                SplitSpec(*self.split)
            except ConfigurationError as exc:
                out.append(str(exc))
        if self.realizations < 2:
            out.append("realizations must be >= 2")
        if not 0 < self.level < 1:
            out.append("level must lie in (0, 1)")
        if self.top_k < 1:
            out.append("top_k must be >= 1")
        if self.workers < 1:
            out.append("workers must be >= 1")
        try:
            self.train_config()
        except ConfigurationError as exc:
            out.extend(str(exc).split("; "))
        return out

    def train_config(self, **overrides) -> TrainConfig:
        kw = {k: getattr(self, k) for k in TRAIN_FIELDS}
        kw.update(mode=self.mode, seed=derive_seed(self.seed, "model"))
        kw.update(overrides)
        return TrainConfig(**kw)

    def split_spec(self) -> SplitSpec:
        return SplitSpec(*self.split, seed=derive_seed(self.seed, "split"))


# -- config plumbing ---------------------------------------------------------

_LIST_FIELDS = {"p_miss": float, "p_labeled": float, "methods": str, "split": float}


def load_config(path) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigurationError(f"{path}: unknown config keys {unknown}")
    return raw


def _parse_list(kind):
    def parse(text):
        return [kind(v) for v in text.split(",") if v.strip()]

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gacn", description="Joint adversarial imputation and classification.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _LIST_FIELDS:
            common.add_argument(flag, type=_parse_list(_LIST_FIELDS[f.name]), default=None, help="comma-separated")
        elif f.type in ("bool",):
            common.add_argument(flag, action=argparse.BooleanOptionalAction, default=None)
        elif f.type in ("int",):
            common.add_argument(flag, type=int, default=None)
        elif f.type in ("float",):
            common.add_argument(flag, type=float, default=None)
        else:
            common.add_argument(flag, default=None)
    sub.add_parser("inject", parents=[common], help="add MAR missingness to a complete CSV")
    sub.add_parser("train", parents=[common], help="train a model on a masked CSV")
    sub.add_parser("impute", parents=[common], help="fill missing cells using a checkpoint")
    sub.add_parser("eval", parents=[common], help="score a completed CSV (ours or external)")
    sub.add_parser("sweep", parents=[common], help="paired accuracy/RMSE sweep")
    return p


def resolve_config(args) -> ExperimentConfig:
    values = load_config(args.config) if args.config else {}
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = ExperimentConfig(**values)
    errors = cfg.problems()
    if errors:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(errors))
    return cfg


# -- output helpers ----------------------------------------------------------


def _atomic_write(path, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic(path, writer) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    os.close(fd)
    writer(tmp)
    os.replace(tmp, path)


def _out(cfg, name) -> str:
    return os.path.join(cfg.out_dir, name)


def _load_input(cfg, path=None) -> Dataset:
    path = path or cfg.data
    if cfg.synthetic and path is None:
        return make_benchmark(seed=derive_seed(cfg.seed, "synthetic"))
    if path is None:
        raise ConfigurationError("no input data: pass --data (or --synthetic)")
    try:
        return load_csv(path, cfg.label_column, cfg.missing_token)
    except OSError as exc:
        raise DatasetError(f"{path}: {exc.strerror}") from exc


def _tables(reports):
    rows = [r.table_row() for r in reports]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue(), json.dumps(rows, indent=2, sort_keys=True) + "\n"


def _curves(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "p_miss", "p_labeled", "rank", "feature", "cumulative_rmse"])
    for r in reports:
        for k, v in enumerate(r.cumulative_rmse):
            w.writerow([r.method, repr(r.p_miss), repr(r.p_labeled), k + 1, int(r.importance_order[k]), repr(float(v))])
    return buf.getvalue()


# -- commands ----------------------------------------------------------------


def cmd_inject(cfg: ExperimentConfig) -> None:
    ds = _load_input(cfg)
    masked = inject_mar(ds, cfg.p_miss[0], derive_rng(cfg.seed, "inject"))
    _atomic(_out(cfg, "masked.csv"), lambda p: write_csv(masked, p, cfg.missing_token))
    _atomic(_out(cfg, "mask.csv"), lambda p: write_mask_csv(masked, p))
    if cfg.synthetic and cfg.data is None:
        _atomic(_out(cfg, "complete.csv"), lambda p: write_csv(ds, p, cfg.missing_token))
    log.info("masked %d of %d cells", int((masked.feature_mask == 0).sum()), masked.features.size)


def _prepare(cfg: ExperimentConfig, ds: Dataset):
    """Normalize, split, and apply label masking to the training rows."""
    ds = normalize(ds) if ds.normalization is None else ds
    tr, va, te = split_indices(ds.n, cfg.split_spec())
    train_set = ds.subset(tr)
    if cfg.p_labeled[0] < 1.0:
        train_set = mask_labels(train_set, cfg.p_labeled[0], derive_rng(cfg.seed, "labels"))
    return ds, train_set, ds.subset(va), ds.subset(te)


def cmd_train(cfg: ExperimentConfig) -> None:
    ds, train_set, val_set, _ = _prepare(cfg, _load_input(cfg))
    tc = cfg.train_config()
    class_count = max(ds.n_classes, 2)
    if tc.mode == "gacn" and not train_set.fully_labeled:
        train_set = train_set.labeled()
    model = init_model(ds.d, class_count, tc, with_classifier=tc.mode != "gain")
    model.normalization = ds.normalization
    model, hist = train(model, train_set, tc, validation=val_set)
    _atomic(_out(cfg, "checkpoint.json"), lambda p: save_checkpoint(p, model, tc))
    _atomic(_out(cfg, "history.csv"), hist.write_csv)
    log.info("trained %d iterations (%s)", tc.iterations, tc.mode)


def cmd_impute(cfg: ExperimentConfig) -> None:
    if not cfg.checkpoint:
        raise ConfigurationError("impute needs --checkpoint")
    model, tc = load_checkpoint(cfg.checkpoint)
    ds = _load_input(cfg)
    if ds.d != model.d:
        raise ConfigurationError(
            f"dimension mismatch: {cfg.data} has {ds.d} features, checkpoint {cfg.checkpoint} expects {model.d}"
        )
    work = normalize(ds, model.normalization) if model.normalization is not None else ds
    noise_high = tc.noise_high if tc else cfg.noise_high
    done = impute(model, work, derive_rng(cfg.seed, "impute"), noise_high)
    if done.normalization is not None:
        done = denormalize(done)
    # observed cells come straight from the input, untouched by the scaling round trip
    filled = np.where(ds.feature_mask == 1, ds.features, done.features)
    out = ds.with_features(filled, np.ones_like(ds.feature_mask))
    _atomic(_out(cfg, "completed.csv"), lambda p: write_csv(out, p, cfg.missing_token, denormalized=False))


def cmd_eval(cfg: ExperimentConfig) -> None:
    """Score a completed CSV: downstream test accuracy, plus RMSE when ``--truth`` is given."""
    if not cfg.completed:
        raise ConfigurationError("eval needs --completed")
    masked = _load_input(cfg)
    norm_stats = normalize(masked).normalization
    masked_n = normalize(masked, norm_stats)
    completed = load_external(cfg.completed, masked_n, cfg.label_column, cfg.missing_token)
    tr, _, te = split_indices(masked.n, cfg.split_spec())
    train_done = completed.subset(tr)
    if cfg.p_labeled[0] < 1.0:
        train_done = mask_labels(train_done, cfg.p_labeled[0], derive_rng(cfg.seed, "labels"))
    tc = cfg.train_config()
    clf = train_classifier(train_done, max(masked.n_classes, 2), tc)
    test = completed.subset(te)
    pred = np.argmax(predict_proba(clf, test.features), axis=1)
    report = {"accuracy": metrics.accuracy(pred, test.labels), "test_rows": int(test.n)}
    if cfg.truth:
        truth = normalize(load_csv(cfg.truth, cfg.label_column, cfg.missing_token), norm_stats)
        rmse = metrics.per_feature_rmse(completed.features, truth.features, masked.feature_mask)
        order, coef = metrics.feature_importance(truth)
        k = min(cfg.top_k, masked.d)
        report["per_feature_rmse"] = [None if np.isnan(v) else float(v) for v in rmse]
        report["importance_order"] = [int(i) for i in order]
        report["cumulative_rmse"] = [float(v) for v in metrics.cumulative_rmse_curve(rmse, order, k)]
    _atomic_write(_out(cfg, "eval.json"), json.dumps(report, indent=2, sort_keys=True) + "\n")


def cmd_sweep(cfg: ExperimentConfig) -> None:
    """Tables over methods x p_miss; with several p_labeled values, also over label fractions."""
    ds = _load_input(cfg)
    reports = []
    methods = cfg.methods
    if len(cfg.p_labeled) > 1 or cfg.p_labeled[0] < 1.0:
        # label-fraction ablation always compares the three adversarial modes
        methods = ["gacn", "ss_gacn", "gain"]
    for p_lab in cfg.p_labeled:
        reps, _ = run_sweep(
            ds,
            methods,
            cfg.p_miss,
            cfg.realizations,
            base_seed=cfg.seed,
            config=cfg.train_config(),
            split_spec=SplitSpec(*cfg.split),
            p_labeled=p_lab,
            top_k=cfg.top_k,
            level=cfg.level,
            workers=cfg.workers,
        )
        reports.extend(reps)
    table_csv, table_json = _tables(reports)
    _atomic_write(_out(cfg, "table.csv"), table_csv)
    _atomic_write(_out(cfg, "table.json"), table_json)
    _atomic_write(_out(cfg, "curves.csv"), _curves(reports))


COMMANDS = {
    "inject": cmd_inject,
    "train": cmd_train,
    "impute": cmd_impute,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg)
    except NumericError as exc:
        print(f"gacn {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigurationError, DatasetError, IntakeError) as exc:
        print(f"gacn {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
