"""Paired accuracy / RMSE sweeps over missingness rates and methods.

Every (p_miss, realization) cell draws one mask, one split and one label mask
and runs all methods on them, so method differences are paired.  Model
initialization and training streams are shared across methods as well; the
only thing that differs between methods in a cell is the method itself.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import metrics
from .baselines import fit_mean, impute_mean
from .dataset import Dataset, SplitSpec, inject_mar, mask_labels, normalize, split_indices
from .model import TrainConfig, classify, impute, init_model, predict_proba, train, train_classifier
from .nn_core import ConfigurationError
from .rng import derive_rng, derive_seed

log = logging.getLogger(__name__)

METHODS = ("gacn", "ss_gacn", "gain", "mean")


class SweepError(RuntimeError):
    pass


@dataclass
class CellResult:
    p_miss: float
    realization: int
    mask_digest: str
    split_digest: str
    accuracy: dict  # method -> float
    rmse: dict  # method -> per-feature RMSE on the test split


def _key(p: float) -> str:
    return repr(float(p))


def _score_posthoc(train_done: Dataset, test_done: Dataset, test: Dataset, class_count, config):
    clf = train_classifier(train_done, class_count, config)
    pred = np.argmax(predict_proba(clf, test_done.features), axis=1)
    return metrics.accuracy(pred, test.labels)


def run_method(method, train_set, val_set, test_set, class_count, config, impute_seed):
    """Train ``method`` on ``train_set``; return (test accuracy, completed test features)."""
    if method in ("gacn", "ss_gacn", "gain"):
        fit_set = train_set
        if method == "gacn" and not train_set.fully_labeled:
            # plain GACN can only use labeled rows
            fit_set = train_set.labeled()
        cfg = replace(config, mode=method)
        model = init_model(train_set.d, class_count, cfg, with_classifier=method != "gain")
        model, _ = train(model, fit_set, cfg, validation=val_set)
        test_done = impute(model, test_set, derive_rng(impute_seed, "test"), cfg.noise_high)
        if method == "gain":
            train_done = impute(model, train_set, derive_rng(impute_seed, "train"), cfg.noise_high)
            acc = _score_posthoc(train_done, test_done, test_set, class_count, cfg)
        else:
            pred, _ = classify(model, test_set, derive_rng(impute_seed, "test"), cfg.noise_high)
            acc = metrics.accuracy(pred, test_set.labels)
        return acc, test_done.features
    if method == "mean":
        imp = fit_mean(train_set)
        train_done = impute_mean(imp, train_set)
        test_done = impute_mean(imp, test_set)
        return _score_posthoc(train_done, test_done, test_set, class_count, config), test_done.features
    raise ConfigurationError(f"unknown method {method!r}; choose from {METHODS}")


def run_cell(
    complete: Dataset,
    methods: Sequence[str],
    p_miss: float,
    realization: int,
    base_seed: int,
    config: TrainConfig,
    split_spec: SplitSpec,
    p_labeled: float = 1.0,
) -> CellResult:
    """One paired realization: inject, split, mask labels, then run every method."""
    ctx = (_key(p_miss), realization)
    masked = inject_mar(complete, p_miss, derive_rng(base_seed, "mask", *ctx))
    tr_idx, va_idx, te_idx = split_indices(complete.n, split_spec, derive_rng(base_seed, "split", *ctx))
    train_set, val_set, test_set = (masked.subset(i) for i in (tr_idx, va_idx, te_idx))
    if p_labeled < 1.0:
        train_set = mask_labels(train_set, p_labeled, derive_rng(base_seed, "labels", *ctx))
    truth = complete.features[te_idx]
    cfg = replace(config, seed=derive_seed(base_seed, "model", *ctx))
    impute_seed = derive_seed(base_seed, "impute", *ctx)
    class_count = max(complete.n_classes, 2)
    acc, rmse = {}, {}
    for method in methods:
        try:
            a, filled = run_method(method, train_set, val_set, test_set, class_count, cfg, impute_seed)
        except Exception as exc:
            raise SweepError(f"method={method} p_miss={p_miss} realization={realization}: {exc}") from exc
        acc[method] = a
        rmse[method] = metrics.per_feature_rmse(filled, truth, test_set.feature_mask)
    split_digest = derive_seed(0, *np.concatenate([tr_idx, [-1], va_idx, [-1], te_idx]).tolist())
    return CellResult(p_miss, realization, masked.digest(), str(split_digest), acc, rmse)


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(
    complete: Dataset,
    methods: Sequence[str],
    p_miss_list: Sequence[float],
    realizations: int,
    base_seed: int = 0,
    config: TrainConfig = TrainConfig(),
    split_spec: SplitSpec = SplitSpec(),
    p_labeled: float = 1.0,
    top_k: int | None = None,
    level: float = 0.9,
    workers: int = 1,
):
    """Accuracy/RMSE table over ``methods x p_miss_list``.

    ``complete`` must be fully observed and labeled; it is min-max normalized
    here so RMSE is reported in [0, 1] feature units.  Returns
    ``(reports, cells)``: one :class:`metrics.EvalReport` per (method, p_miss)
    in input order, and the raw per-realization :class:`CellResult` list.
    """
    if realizations < 2:
        raise ConfigurationError("a sweep needs at least 2 realizations for a confidence interval")
    if not complete.is_complete or not complete.fully_labeled:
        raise ConfigurationError("sweeps start from a complete, fully labeled dataset")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigurationError(f"unknown methods {unknown}; choose from {METHODS}")
    if complete.normalization is None:
        complete = normalize(complete)
    order, _ = metrics.feature_importance(complete)
    k = complete.d if top_k is None else min(top_k, complete.d)

    jobs = [
        (complete, tuple(methods), p, r, base_seed, config, split_spec, p_labeled)
        for p in p_miss_list
        for r in range(realizations)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell_args, jobs))
    else:
        cells = []
        for job in jobs:
            cells.append(_run_cell_args(job))
            log.info("cell p_miss=%s realization=%d done", job[2], job[3])

    reports = []
    for method in methods:
        for p in p_miss_list:
            mine = [c for c in cells if c.p_miss == p]
            accs = [c.accuracy[method] for c in mine]
            mean, half = metrics.confidence_interval(accs, level)
            rm = np.array([c.rmse[method] for c in mine])
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)  # features never masked stay NaN
                avg = np.nanmean(rm, axis=0)
            curves = [metrics.cumulative_rmse_curve(c.rmse[method], order, k) for c in mine]
            reports.append(
                metrics.EvalReport(
                    method,
                    float(p),
                    float(p_labeled),
                    mean,
                    half,
                    len(accs),
                    avg,
                    order,
                    np.mean(curves, axis=0),
                    accs,
                    curves,
                )
            )
    return reports, cells
