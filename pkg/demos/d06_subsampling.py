"""
How much label text is needed
=============================

Add the augmented rows of only a fraction of labels, chosen uniformly at
random or tail first, and watch PSP@5 climb.
"""
import numpy as np

from labelaug.experiments import FRACTIONS, spearman, subsampling_sweep

res = subsampling_sweep(range(5))

print("fraction ", "  ".join(f"{f:>6.2f}" for f in FRACTIONS))
for scheme, v in res.items():
    curve = v.mean(axis=0)
    print(scheme.ljust(11), "  ".join(f"{x:.4f}" for x in curve), f" rho={spearman(curve):.2f}")

print("tail first wins at 25%:", int(np.sum(res["tail_binned"][:, 0] >= res["random"][:, 0])), "of 5")
