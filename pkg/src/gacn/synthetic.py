"""Bundled synthetic benchmark with traffic-like, floor-heavy features."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset, as_rng


def make_benchmark(
    n: int = 2000,
    n_important: int = 3,
    n_noise: int = 7,
    noise_scale: float = 0.1,
    active_offset: float = 0.25,
    seed=0,
) -> Dataset:
    """Binary-labeled table: ``n_important`` label-correlated features among noise.

    A latent intensity ``u ~ N(0, 1)`` decides the label (``u > 0``, so the
    classes are balanced in expectation).  Each important feature is a
    rectified noisy copy of it: ``v = u + noise_scale * e`` maps to
    ``active_offset + v`` when ``v > 0`` and to 0 otherwise, plus a small
    uniform jitter.  Roughly half the rows sit near a floor of zero, like the
    byte or packet counters of idle flows, and active rows jump by a fixed
    overhead.  The important features are mutually predictable; the noise
    features (rectified normals and log-normals) are independent of
    everything.
    """
    rng = as_rng(seed)
    u = rng.standard_normal(n)
    y = (u > 0).astype(np.int64)
    cols = []
    for _ in range(n_important):
        v = u + noise_scale * rng.standard_normal(n)
        cols.append(np.where(v > 0, active_offset + v, 0.0) + 0.02 * rng.random(n))
    for k in range(n_noise):
        e = rng.standard_normal(n)
        cols.append(np.maximum(e, 0.0) if k % 2 == 0 else np.exp(0.6 * e))
    x = np.column_stack(cols)
    names = [f"imp{k}" for k in range(n_important)] + [f"noise{k}" for k in range(n_noise)]
    return Dataset(x, np.ones(x.shape, dtype=np.int8), y, None, names, ("0", "1"), label_name="label")
