"""Mean imputation and intake of imputations produced by external tools."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, DatasetError, DegenerateFeatureError, denormalize, load_csv, normalize
from .nn_core import ShapeError


@dataclass(frozen=True)
class MeanImputer:
    means: np.ndarray


def fit_mean(train: Dataset) -> MeanImputer:
    m = train.feature_mask
    counts = m.sum(axis=0)
    empty = [train.feature_names[j] for j in np.flatnonzero(counts == 0)]
    if empty:
        raise DegenerateFeatureError(f"features with no observed training cells: {empty}", empty)
    sums = np.where(m == 1, train.features, 0.0).sum(axis=0)
    return MeanImputer(sums / counts)


def impute_mean(imp: MeanImputer, ds: Dataset) -> Dataset:
    if ds.d != imp.means.shape[0]:
        raise ShapeError(f"dataset has {ds.d} features, imputer was fitted on {imp.means.shape[0]}")
    filled = np.where(ds.feature_mask == 1, ds.features, imp.means)
    return ds.with_features(filled, np.ones_like(ds.feature_mask))


class IntakeError(DatasetError):
    pass


def validate_external(completed: Dataset, masked: Dataset, rtol: float = 1e-9) -> None:
    """Check an externally completed table against the masked table it was made from.

    Shapes must agree, the completed table must have no missing cells, and
    every cell observed in ``masked`` must be unchanged.  ``rtol`` only absorbs
    the rounding of a normalize/denormalize round trip.
    """
    if completed.features.shape != masked.features.shape:
        raise IntakeError(
            f"completed table shape {completed.features.shape} != masked table shape {masked.features.shape}"
        )
    if completed.feature_names != masked.feature_names:
        raise IntakeError("column names/order differ between completed and masked tables")
    if not completed.is_complete:
        i, j = np.argwhere(completed.feature_mask == 0)[0]
        raise IntakeError(f"completed table still has a missing cell at row {i + 1}, column {completed.feature_names[j]!r}")
    obs = masked.feature_mask == 1
    bad = obs & ~np.isclose(completed.features, masked.features, rtol=rtol, atol=1e-12)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise IntakeError(
            f"observed cell changed at row {i + 1}, column {masked.feature_names[j]!r}: "
            f"{float(masked.features[i, j])!r} -> {float(completed.features[i, j])!r}"
        )


def load_external(path, masked: Dataset, label_column=None, missing_token: str = "", rtol: float = 1e-9) -> Dataset:
    """Read and validate an external imputation; returned in the masked table's normalized space."""
    raw = load_csv(path, label_column, missing_token, classes=masked.classes or None)
    reference = denormalize(masked) if masked.normalization is not None else masked
    validate_external(raw, reference, rtol)
    if masked.normalization is not None:
        raw = normalize(raw, masked.normalization)
    return raw
