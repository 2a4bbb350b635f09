"""
A linear one-vs-all model on the synthetic benchmark
====================================================

Hashed tf-idf features, shortlist BCE, SGD. Train on the original rows
and on the rows plus the augmented label rows, then compare.
"""
import time

from labelaug import (AugmentConfig, build_augmented, build_propensities, combine, evaluate,
                      predict, train)
from labelaug.experiments import DESK_TRAIN
from labelaug.synthetic import SyntheticSpec, make_synthetic

spec = SyntheticSpec()
trn, tst = make_synthetic(0, spec)
print(trn.n_rows, "train rows,", tst.n_rows, "test rows,", trn.n_labels, "labels")
print(trn.instances[0], "->", [trn.label_features[j] for j in trn.y.row_dict(0)])

prop = build_propensities(trn.y)
freq = trn.y.label_frequencies()
z = build_augmented(trn, AugmentConfig()).dataset

for name, ds in (("D", trn), ("G", combine(trn, z))):
    t0 = time.perf_counter()
    model = train(ds, DESK_TRAIN)
    rep = evaluate(predict(model, tst.instances, 5), tst.y, prop, freq)
    m = rep.metrics
    print(f"{name}: P@1 {m['P@1']:.3f} PSP@5 {m['PSP@5']:.3f} C@5 {m['C@5']:.3f}"
          f"  ({time.perf_counter() - t0:.1f}s)")
    print("   bins:", [round(b.contribution, 4) for b in rep.bins])
