"""
Augmentation effect over seeds
==============================

D: original rows. Z: label rows only. G: D plus Z. U: G subsampled to
the size of D. Z1+D: D plus label rows that only point at themselves.
Takes about 20 seconds.
"""
import numpy as np

from labelaug.experiments import VARIANTS, augmentation_effect

res = augmentation_effect(range(10))

for metric in ("P@1", "PSP@5", "C@5"):
    table = np.array([[r.metrics[v][metric] for v in VARIANTS] for r in res])
    print(metric.ljust(6), "  ".join(f"{v}={x:.4f}" for v, x in zip(VARIANTS, table.mean(axis=0))))

d = np.array([r.metrics["D"]["PSP@5"] for r in res])
g = np.array([r.metrics["G"]["PSP@5"] for r in res])
print("G beats D on PSP@5 in", int((g > d).sum()), "of", len(res), "seeds")
print("mean relative gain", f"{np.mean((g - d) / d):+.1%}")
