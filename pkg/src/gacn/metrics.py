"""Accuracy, imputation RMSE, feature importance and confidence intervals."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .dataset import Dataset, DatasetError
from .nn_core import ConfigurationError, ShapeError


def accuracy(predictions, truth) -> float:
    p = np.asarray(predictions)
    t = np.asarray(truth)
    if p.shape != t.shape:
        raise ShapeError(f"predictions {p.shape} and truth {t.shape} differ in length")
    if p.size == 0:
        raise ShapeError("accuracy of an empty prediction set is undefined")
    return float(np.mean(p == t))


def per_feature_rmse(imputed, truth, mask) -> np.ndarray:
    """RMSE per feature over missing cells (mask == 0); NaN where nothing was missing."""
    imputed = np.asarray(imputed, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    mask = np.asarray(mask)
    if not imputed.shape == truth.shape == mask.shape:
        raise ShapeError(f"shapes differ: imputed {imputed.shape}, truth {truth.shape}, mask {mask.shape}")
    missing = mask == 0
    counts = missing.sum(axis=0)
    sq = np.where(missing, (imputed - truth) ** 2, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sqrt(sq / counts)
    out[counts == 0] = np.nan
    return out


def _pearson(x, y) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    den = np.sqrt(np.dot(xc, xc) * np.dot(yc, yc))
    return float(np.dot(xc, yc) / den) if den > 0 else 0.0


def feature_importance(complete: Dataset):
    """Rank features by |Pearson correlation| with the label, most important first.

    Binary labels are used as 0/1; with more classes each feature takes its
    largest absolute correlation against the one-hot class columns.
    Returns ``(order, coefficients)``.
    """
    if not complete.fully_labeled:
        raise DatasetError("feature importance needs every row labeled")
    x = complete.features
    y = complete.labels
    k = max(complete.n_classes, 2)
    coef = np.zeros(complete.d)
    for j in range(complete.d):
        if k == 2:
            coef[j] = _pearson(x[:, j], y.astype(np.float64))
        else:
            cs = [_pearson(x[:, j], (y == c).astype(np.float64)) for c in range(k)]
            coef[j] = cs[int(np.argmax(np.abs(cs)))]
    order = np.argsort(-np.abs(coef), kind="stable")
    return order, coef


def cumulative_rmse_curve(rmse, importance_order, top_k: int) -> np.ndarray:
    rmse = np.asarray(rmse, dtype=np.float64)
    if top_k > rmse.shape[0]:
        raise ConfigurationError(f"top_k={top_k} exceeds feature count {rmse.shape[0]}")
    picked = rmse[np.asarray(importance_order)[:top_k]]
    return np.cumsum(np.nan_to_num(picked, nan=0.0))


def confidence_interval(samples, level: float = 0.9):
    """Student-t interval for the mean: returns (mean, halfwidth)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ConfigurationError("confidence interval needs at least 2 samples")
    if not 0 < level < 1:
        raise ConfigurationError(f"level must lie in (0, 1), got {level}")
    n = x.size
    # exact zero for constant samples; the mean itself may round
    s = 0.0 if np.all(x == x[0]) else x.std(ddof=1)
    tq = stats.t.ppf((1 + level) / 2, n - 1)
    return float(x.mean()), float(tq * s / np.sqrt(n))


@dataclass
class EvalReport:
    method: str
    p_miss: float
    p_labeled: float
    accuracy_mean: float
    accuracy_ci_halfwidth: float
    realization_count: int
    per_feature_rmse: np.ndarray
    importance_order: np.ndarray
    cumulative_rmse: np.ndarray
    accuracies: list = field(default_factory=list)
    curves: list = field(default_factory=list)

    def table_row(self) -> dict:
        return {
            "method": self.method,
            "p_miss": self.p_miss,
            "p_labeled": self.p_labeled,
            "accuracy_mean": self.accuracy_mean,
            "ci_halfwidth": self.accuracy_ci_halfwidth,
            "realizations": self.realization_count,
        }
