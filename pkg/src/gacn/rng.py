"""Seed derivation: every random stream is a function of (seed, stage labels).

``derive_seed(seed, "train", "gen")`` hashes the top-level seed together with
the labels, so adding a new stage never shifts the streams of existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *labels) -> int:
    h = hashlib.sha256(str(int(seed)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest()[:8], "little")


def derive_rng(seed: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *labels))
