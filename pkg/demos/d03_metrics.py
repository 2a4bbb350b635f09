"""
Precision, propensity-scored precision and coverage
===================================================

Hand-made predictions against a small truth matrix.
"""
import numpy as np

from labelaug import (Predictions, SparseLabelMatrix, bin_contributions, build_propensities,
                      coverage_at_k, evaluate, precision_at_k, psp_at_k)

train_y = SparseLabelMatrix.from_rows([[0, 1, 2, 3, 4], [0, 1, 2, 3], [0, 1, 2], [0, 1], [0]] * 10, 5)
truth = SparseLabelMatrix.from_rows([[0], [1], [3], [2, 4]], 5)

# rows of top-3 label indices, scores decreasing
pred = Predictions(np.array([[0, 1, 2], [0, 1, 3], [3, 0, 1], [0, 4, 2]]),
                   np.tile([3.0, 2.0, 1.0], (4, 1)))

prop = build_propensities(train_y)        # A=0.55, B=1.5
print(np.round(prop.p, 4))           # rare labels get small propensities
print(np.round(prop.inverse, 2))

for k in (1, 3):
    print(k, precision_at_k(pred, truth, k), round(psp_at_k(pred, truth, prop, k), 4),
          coverage_at_k(pred, truth, k), coverage_at_k(pred, truth, k, correct_only=False))

# P@3 split over frequency bins of the training labels
for row in bin_contributions(pred, truth, train_y.label_frequencies(), n_bins=3, k=3):
    print(row)

rep = evaluate(pred, truth, prop, train_y.label_frequencies(), ks=(1, 3), n_bins=3, bin_k=3)
print(rep.to_csv())
