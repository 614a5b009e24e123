"""Scoring an imputation made by some other tool.

Any program can fill the masked CSV (a chained-equations package, say).
Here a column median stands in for it; the intake check insists the
observed cells came back unchanged before anything is scored.
"""

import csv
import tempfile
from pathlib import Path

import numpy as np

from gacn import load_csv, make_benchmark, inject_mar, write_csv
from gacn.baselines import IntakeError, load_external

work = Path(tempfile.mkdtemp())
masked = inject_mar(make_benchmark(n=200, seed=5), 0.25, 6)
write_csv(masked, work / "masked.csv")

# the "external tool": per-column median of what it can see
raw = load_csv(work / "masked.csv", "label")
obs = np.where(raw.feature_mask == 1, raw.features, np.nan)
filled = np.where(raw.feature_mask == 1, raw.features, np.nanmedian(obs, axis=0))
write_csv(raw.with_features(filled, np.ones_like(raw.feature_mask)), work / "external.csv")

done = load_external(work / "external.csv", masked, "label")
print("accepted external table:", done.features.shape, "complete:", done.is_complete)

# tamper with one observed cell and try again
i, j = np.argwhere(raw.feature_mask == 1)[0]
with open(work / "external.csv", newline="") as fh:
    rows = list(csv.reader(fh))
rows[i + 1][j] = str(float(rows[i + 1][j]) + 0.5)  # row 0 is the header; label sits last
with open(work / "tampered.csv", "w", newline="") as fh:
    csv.writer(fh).writerows(rows)
try:
    load_external(work / "tampered.csv", masked, "label")
except IntakeError as exc:
    print("rejected:", exc)
