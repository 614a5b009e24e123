"""Tabular data container, missingness injection, splitting and sampling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .nn_core import ConfigurationError

DEFAULT_NOISE_HIGH = 0.01


class DatasetError(ValueError):
    pass


class ParseError(DatasetError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class SchemaError(DatasetError):
    pass


class DegenerateFeatureError(DatasetError):
    def __init__(self, message, features=()):
        super().__init__(message)
        self.features = list(features)


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with per-cell observation mask and per-row label mask.

    ``labels`` holds class indices; entries with ``label_mask == 0`` are -1.
    Missing feature cells carry a placeholder value of 0.
    """

    features: np.ndarray
    feature_mask: np.ndarray
    labels: np.ndarray | None = None
    label_mask: np.ndarray | None = None
    feature_names: tuple[str, ...] = ()
    classes: tuple[str, ...] = ()
    normalization: np.ndarray | None = None  # (d, 2) rows of (min, max)
    label_name: str | None = None
    label_position: int | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        m = np.asarray(self.feature_mask, dtype=np.int8)
        if x.ndim != 2 or x.shape != m.shape:
            raise DatasetError(f"features {x.shape} and mask {m.shape} must be equal 2-D shapes")
        n, d = x.shape
        if self.labels is None:
            labels = np.full(n, -1, dtype=np.int64)
            lmask = np.zeros(n, dtype=np.int8)
        else:
            labels = np.asarray(self.labels, dtype=np.int64)
            lmask = (
                (labels >= 0).astype(np.int8)
                if self.label_mask is None
                else np.asarray(self.label_mask, dtype=np.int8)
            )
            labels = np.where(lmask == 1, labels, -1)
        if labels.shape != (n,) or lmask.shape != (n,):
            raise DatasetError("labels and label_mask must have one entry per row")
        if np.any(labels[lmask == 1] < 0):
            raise SchemaError("labeled rows must carry a class index >= 0")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(d))
        if len(names) != d:
            raise DatasetError(f"{len(names)} feature names for {d} features")
        if not np.all(np.isfinite(x[m == 1])):
            raise DatasetError("observed cells must be finite")
        n_classes = len(self.classes)
        if n_classes and np.any(labels[lmask == 1] >= n_classes):
            raise SchemaError("label index outside declared classes")
        for arr in (x, m, labels, lmask):
            arr.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "feature_mask", m)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "label_mask", lmask)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        if self.classes:
            return len(self.classes)
        lab = self.labels[self.label_mask == 1]
        return int(lab.max()) + 1 if lab.size else 0

    @property
    def is_complete(self) -> bool:
        return bool(np.all(self.feature_mask == 1))

    @property
    def fully_labeled(self) -> bool:
        return bool(np.all(self.label_mask == 1))

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return replace(
            self,
            features=self.features[rows],
            feature_mask=self.feature_mask[rows],
            labels=self.labels[rows],
            label_mask=self.label_mask[rows],
        )

    def labeled(self) -> "Dataset":
        return self.subset(np.flatnonzero(self.label_mask == 1))

    def with_features(self, features, feature_mask=None) -> "Dataset":
        return replace(
            self,
            features=features,
            feature_mask=self.feature_mask if feature_mask is None else feature_mask,
        )

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for a in (self.features, self.feature_mask, self.labels, self.label_mask):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()


# -- CSV ---------------------------------------------------------------------


def _class_sort_key(v: str):
    try:
        return (0, float(v), v)
    except ValueError:
        return (1, 0.0, v)


def load_csv(
    path,
    label_column: str | None = None,
    missing_token: str = "",
    classes: Sequence[str] | None = None,
) -> Dataset:
    """Read a headed CSV. Cells equal to ``missing_token`` become missing (mask 0, value 0)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, header row expected") from None
        rows = [r for r in reader if r]
    label_pos = None
    if label_column is not None:
        if label_column not in header:
            raise SchemaError(f"{path}: label column {label_column!r} not in header")
        label_pos = header.index(label_column)
    feat_cols = [j for j in range(len(header)) if j != label_pos]
    n, d = len(rows), len(feat_cols)
    x = np.zeros((n, d))
    m = np.ones((n, d), dtype=np.int8)
    raw_labels = []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: row {i + 1} has {len(row)} cells, header has {len(header)}", row=i + 1
            )
        for k, j in enumerate(feat_cols):
            cell = row[j].strip()
            if cell == missing_token:
                m[i, k] = 0
                continue
            try:
                x[i, k] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell {cell!r} at row {i + 1}, column {header[j]!r}",
                    row=i + 1,
                    column=header[j],
                ) from None
            if not math.isfinite(x[i, k]):
                raise ParseError(
                    f"{path}: non-finite cell {cell!r} at row {i + 1}, column {header[j]!r}",
                    row=i + 1,
                    column=header[j],
                )
        if label_pos is not None:
            raw_labels.append(row[label_pos].strip())

    labels = None
    class_names: tuple[str, ...] = ()
    if label_pos is not None:
        present = [v for v in raw_labels if v != missing_token and v != ""]
        if classes is None:
            class_names = tuple(sorted(set(present), key=_class_sort_key))
        else:
            class_names = tuple(str(c) for c in classes)
            unknown = sorted(set(present) - set(class_names))
            if unknown:
                raise SchemaError(f"{path}: label values {unknown} outside declared classes")
        index = {c: k for k, c in enumerate(class_names)}
        labels = np.array(
            [index[v] if v in index else -1 for v in raw_labels], dtype=np.int64
        ).reshape(n)
    return Dataset(
        x,
        m,
        labels,
        None,
        tuple(header[j] for j in feat_cols),
        class_names,
        label_name=label_column,
        label_position=label_pos,
    )


def _fmt(v: float) -> str:
    return repr(float(v))


def write_csv(ds: Dataset, path, missing_token: str = "", denormalized: bool = True) -> None:
    """Write features (and labels, at their original column position) as CSV."""
    x = denormalize(ds).features if (denormalized and ds.normalization is not None) else ds.features
    header = list(ds.feature_names)
    has_labels = ds.label_name is not None
    pos = ds.label_position if ds.label_position is not None else len(header)
    if has_labels:
        header.insert(pos, ds.label_name)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(ds.n):
            cells = [
                _fmt(x[i, j]) if ds.feature_mask[i, j] else missing_token for j in range(ds.d)
            ]
            if has_labels:
                lab = (
                    ds.classes[ds.labels[i]] if ds.classes else str(ds.labels[i])
                ) if ds.label_mask[i] else missing_token
                cells.insert(pos, lab)
            w.writerow(cells)


def write_mask_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.feature_names)
        w.writerows(ds.feature_mask.tolist())


def read_mask_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.array([[int(c) for c in r] for r in reader if r], dtype=np.int8)


# -- transforms --------------------------------------------------------------


def normalize(ds: Dataset, stats: np.ndarray | None = None) -> Dataset:
    """Min-max scale observed cells to [0, 1]; constant features map to 0.

    ``stats`` reuses (min, max) pairs fitted elsewhere, e.g. on a training split.
    """
    x, m = ds.features, ds.feature_mask
    if stats is None:
        empty = [ds.feature_names[j] for j in range(ds.d) if not m[:, j].any()]
        if empty:
            raise DegenerateFeatureError(f"features with no observed values: {empty}", empty)
        masked = np.where(m == 1, x, np.nan)
        stats = np.column_stack([np.nanmin(masked, axis=0), np.nanmax(masked, axis=0)])
    stats = np.asarray(stats, dtype=np.float64)
    if stats.shape != (ds.d, 2):
        raise DatasetError(f"normalization stats shape {stats.shape} != ({ds.d}, 2)")
    lo, hi = stats[:, 0], stats[:, 1]
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (x - lo) / safe, 0.0)
    scaled = np.where(m == 1, scaled, 0.0)
    return replace(ds, features=scaled, normalization=stats)


def denormalize(ds: Dataset) -> Dataset:
    if ds.normalization is None:
        return ds
    lo, hi = ds.normalization[:, 0], ds.normalization[:, 1]
    x = ds.features * (hi - lo) + lo
    return replace(ds, features=x, normalization=None)


def inject_mar(ds: Dataset, p_miss: float, seed) -> Dataset:
    """Drop every cell independently with probability ``p_miss``."""
    if not 0.0 <= p_miss < 1.0:
        raise ConfigurationError(f"p_miss must lie in [0, 1), got {p_miss}")
    if not ds.is_complete:
        raise DatasetError("inject_mar expects a complete dataset")
    rng = as_rng(seed)
    keep = (rng.random(ds.features.shape) >= p_miss).astype(np.int8)
    return ds.with_features(np.where(keep == 1, ds.features, 0.0), keep)


def mask_labels(ds: Dataset, p_labeled: float, seed) -> Dataset:
    """Keep each row's label independently with probability ``p_labeled``."""
    if not 0.0 <= p_labeled <= 1.0:
        raise ConfigurationError(f"p_labeled must lie in [0, 1], got {p_labeled}")
    if not ds.fully_labeled:
        raise DatasetError("mask_labels expects every row to be labeled")
    rng = as_rng(seed)
    keep = (rng.random(ds.n) < p_labeled).astype(np.int8)
    return replace(ds, labels=np.where(keep == 1, ds.labels, -1), label_mask=keep)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    validation_fraction: float = 0.1
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        fr = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if any(f <= 0 for f in fr):
            raise ConfigurationError(f"split fractions must be positive, got {fr}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ConfigurationError(f"split fractions must sum to 1, got {sum(fr)}")


def split_indices(n: int, spec: SplitSpec, rng=None):
    rng = as_rng(spec.seed if rng is None else rng)
    perm = rng.permutation(n)
    n_train = int(round(n * spec.train_fraction))
    n_val = int(round(n * spec.validation_fraction))
    n_val = min(n_val, n - n_train)
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def split(ds: Dataset, spec: SplitSpec, rng=None):
    """Seeded shuffle into (train, validation, test)."""
    return tuple(ds.subset(idx) for idx in split_indices(ds.n, spec, rng))


def upsample_to_balance(ds: Dataset, rng) -> Dataset:
    """Resample minority classes with replacement up to the majority count."""
    if not ds.fully_labeled:
        raise DatasetError("upsample_to_balance needs every row labeled")
    rng = as_rng(rng)
    counts = np.bincount(ds.labels, minlength=ds.n_classes)
    target = counts.max()
    rows = [np.arange(ds.n)]
    for c, cnt in enumerate(counts):
        if 0 < cnt < target:
            members = np.flatnonzero(ds.labels == c)
            rows.append(rng.choice(members, size=target - cnt, replace=True))
    return ds.subset(np.concatenate(rows))


# -- sampling ----------------------------------------------------------------


@dataclass
class Batch:
    x: np.ndarray
    m: np.ndarray
    labels: np.ndarray
    kappa: np.ndarray
    rows: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.x)


def sample_minibatch(ds: Dataset, batch_size: int, rng) -> Batch:
    """Uniform row sampling with replacement."""
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")
    if ds.n == 0:
        raise DatasetError("cannot sample from an empty dataset")
    rows = rng.integers(0, ds.n, size=batch_size)
    return Batch(
        ds.features[rows],
        ds.feature_mask[rows].astype(np.float64),
        ds.labels[rows],
        ds.label_mask[rows].astype(np.float64),
        rows,
    )


def sample_noise(d: int, rng, noise_high: float = DEFAULT_NOISE_HIGH, batch: int | None = None):
    """i.i.d. U[0, noise_high] entries, shape (d,) or (batch, d)."""
    if d < 1:
        raise ConfigurationError(f"d must be >= 1, got {d}")
    if not 0.0 < noise_high <= 1.0:
        raise ConfigurationError(f"noise_high must lie in (0, 1], got {noise_high}")
    shape = (d,) if batch is None else (batch, d)
    return rng.uniform(0.0, noise_high, size=shape)


@dataclass
class SelectionVector:
    r: np.ndarray
    hint: np.ndarray


def hint_vector(r, m):
    r = np.asarray(r, dtype=np.float64)
    return r * np.asarray(m, dtype=np.float64) + 0.5 * (1.0 - r)


def sample_selection(d: int, m, rng=None, index: int | None = None) -> SelectionVector:
    """Selection vector with a single zero at a uniform index, plus its hint.

    ``index`` forces the zero position (0-based).
    """
    m = np.asarray(m, dtype=np.float64)
    if d < 1 or m.shape != (d,):
        raise ConfigurationError(f"need d >= 1 and len(m) == d, got d={d}, m shape {m.shape}")
    k = int(rng.integers(0, d)) if index is None else int(index)
    r = np.ones(d)
    r[k] = 0.0
    return SelectionVector(r, hint_vector(r, m))


def sample_selection_batch(m: np.ndarray, rng) -> SelectionVector:
    """Row-wise :func:`sample_selection` for a (B, d) mask."""
    b, d = m.shape
    idx = rng.integers(0, d, size=b)
    r = np.ones((b, d))
    r[np.arange(b), idx] = 0.0
    return SelectionVector(r, hint_vector(r, m))
