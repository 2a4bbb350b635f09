"""
Augmented training rows from label text
=======================================

Every label contributes one extra row: its own text as the instance and
its co-occurrence neighbourhood as soft targets.
"""
from labelaug import AugmentConfig, build_augmented, build_cooccurrence, combine
from labelaug import gandalf_targets, glas_targets, self_annotation_targets
from labelaug.augmentor import equivoluminous_bins, select_labels
from labelaug.synthetic import make_synthetic

trn, tst = make_synthetic(0)
g = build_cooccurrence(trn.y)
freq = trn.y.label_frequencies()

j = int(freq.argmax())
print(trn.label_features[j], "seen", freq[j], "times")

for delta in (0.0, 0.1, 0.3):
    t = gandalf_targets(g, j, delta)
    print(delta, len(t), sorted(t.items())[:4])

print(glas_targets(g, j, 0.1) == gandalf_targets(g, j, 0.1))   # different weights
print(self_annotation_targets(j))

res = build_augmented(trn, AugmentConfig(delta=0.1), graph=g)
z = res.dataset
print(z.n_rows, "augmented rows,", res.skipped, "labels skipped")
print(z.instances[0], z.y.row_dict(0))

g_ds = combine(trn, z)
print(g_ds.n_rows == trn.n_rows + z.n_rows)

# label subsampling: bins of equal positive volume, bin 0 is the tail
b = equivoluminous_bins(freq, 5)
print([int((b == k).sum()) for k in range(5)])
for scheme in ("random", "tail_binned"):
    pick = select_labels(freq, 0.25, scheme, seed=0)
    print(scheme, pick.size, "labels, mean freq", freq[pick].mean().round(2))

# a random walk over the graph reaches labels that never co-occur with j
walk = build_augmented(trn, AugmentConfig(graph_kind="random_walk"), graph=g).dataset
print(walk.y.nnz, "vs", z.y.nnz, "target entries")
