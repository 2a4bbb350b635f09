"""
Label matrices, corpora and the co-occurrence graph
===================================================

A three-instance toy problem, written to disk in the sparse text format,
read back, and turned into a label co-occurrence graph.
"""
import tempfile
from pathlib import Path

import numpy as np

from labelaug import (SparseLabelMatrix, TextCorpus, build_cooccurrence, conditional,
                      read_label_matrix, symmetrized_similarity, top_neighbors,
                      write_label_matrix, write_text_corpus)
from labelaug.dataset_io import format_label_matrix

y = SparseLabelMatrix.from_rows([[0, 1], [1, 2], [1]], 3)
texts = TextCorpus(("mario party 7", "super smash bros", "mario kart"))
labels = TextCorpus(("party games", "mario", "fighting"))

# header "N L", then one "index:weight" list per row
print(format_label_matrix(y))

d = Path(tempfile.mkdtemp())
write_label_matrix(y, d / "trn_X_Y.txt")
write_text_corpus(texts, d / "trn.raw.txt")
assert read_label_matrix(d / "trn_X_Y.txt") == y

g = build_cooccurrence(y)
print(g.counts.toarray())        # Y^T Y, diagonal holds label frequencies
print(g.frequencies)

# P(i | j) is not symmetric, the averaged similarity is
print(conditional(g, 0, 1), conditional(g, 1, 0))
print(symmetrized_similarity(g, 0, 1))

for j, name in enumerate(labels):
    print(name, "->", [(labels[i], round(p, 3)) for i, p in top_neighbors(g, j, 3)])

# the parallel Gram sum gives the same integers
assert build_cooccurrence(y, workers=4) == g
print(np.allclose(g.counts.toarray(), g.counts.toarray().T))
