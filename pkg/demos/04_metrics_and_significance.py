"""Confusion-matrix metrics, the random-guessing baseline and a one-tailed Z test.

    python demos/04_metrics_and_significance.py
"""
import numpy as np

from peacewords.evaluation import Aggregate, ConfusionMatrix, confusion, metrics, random_baseline, z_test
from peacewords.indices import default_labels_csv, read_labels_csv

# %% Two classes, class 1 positive.
r = metrics(ConfusionMatrix.from_binary_counts(tp=3, tn=4, fp=1, fn=2), "binary")
print(f"accuracy {r.accuracy:.4f}  precision {r.precision:.4f}  recall {r.recall:.4f}  F1 {r.f1:.4f}")

# %% Three classes, support-weighted. Weighted recall is sum(TP)/N, i.e. the accuracy itself.
cm = confusion([0, 0, 1, 1, 1, 2, 2, 2, 2], [0, 1, 1, 1, 2, 2, 2, 0, 2], (0, 1, 2))
print(cm.matrix)
w = metrics(cm, "weighted")
print(f"weighted: accuracy {w.accuracy:.4f} recall {w.recall:.4f} precision {w.precision:.4f} F1 {w.f1:.4f}")

# %% Guessing uniformly among three classes for the 18 labeled countries, 20 times.
labels = np.array([int(v) for v in read_labels_csv(default_labels_csv()).values()])
base = random_baseline(labels, n_runs=20, seed=0)["accuracy"]
print(f"\nrandom guessing: {base.mean:.3f} +/- {base.sem:.3f} (expected 1/3)")

# %% Is a 0.525 +/- 0.040 classifier better than 0.356 +/- 0.033 guessing?
for choice in ("model_runs", "pooled"):
    z = z_test(Aggregate(0.525, 0.040, 20), Aggregate(0.356, 0.033, 20), choice)
    print(f"{choice:10s} z = {z.z:.2f}  p = {z.p_value:.1e}")
