"""Empirical label co-occurrence graph and the views derived from it.

``G[i, j]`` counts the training instances annotated with both ``i`` and
``j``; the diagonal holds label frequencies. Conditionals
``P[i | j] ~ G[i, j] / G[j, j]`` and symmetrised similarities are computed
on demand from the sparse counts, never as a dense ``L x L`` matrix.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dataset_io import SparseLabelMatrix
from .errors import SoftWeightsPresent, ZeroFrequencyLabel


@dataclass(frozen=True)
class CooccurrenceGraph:
    counts: sp.csr_matrix  # symmetric int64, canonical

    @property
    def n_labels(self) -> int:
        return self.counts.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts.diagonal().astype(np.int64)

    def frequency(self, j: int) -> int:
        return int(self.count(j, j))

    def count(self, i: int, j: int) -> int:
        idx, vals = self.row(j)
        pos = np.searchsorted(idx, i)
        if pos < idx.size and idx[pos] == i:
            return int(vals[pos])
        return 0

    def row(self, j: int):
        """Column indices and counts of row ``j`` (equal to column ``j``)."""
        lo, hi = self.counts.indptr[j], self.counts.indptr[j + 1]
        return self.counts.indices[lo:hi], self.counts.data[lo:hi]

    def _require(self, j: int) -> int:
        n = self.frequency(j)
        if n == 0:
            raise ZeroFrequencyLabel(j)
        return n

    def conditional_row(self, j: int):
        """Labels ``i`` co-occurring with ``j`` and ``P[i | j]`` for each."""
        n_j = self._require(j)
        idx, vals = self.row(j)
        return idx, vals / n_j

    def similarity_row(self, j: int):
        """Labels ``i`` co-occurring with ``j`` and ``S[i, j]`` for each."""
        n_j = self._require(j)
        idx, vals = self.row(j)
        n_i = self.frequencies[idx]
        return idx, 0.5 * (vals / n_j + vals / n_i)

    def __eq__(self, other):
        if not isinstance(other, CooccurrenceGraph):
            return NotImplemented
        a, b = self.counts, other.counts
        return (a.shape == b.shape and np.array_equal(a.indptr, b.indptr)
                and np.array_equal(a.indices, b.indices)
                and np.array_equal(a.data, b.data))


@dataclass(frozen=True)
class WalkGraph:
    scores: sp.csr_matrix  # row j: retained neighbours of j, max 1
    restart_prob: float
    walk_length: int
    top_k: int

    @property
    def n_labels(self) -> int:
        return self.scores.shape[0]

    def row(self, j: int):
        lo, hi = self.scores.indptr[j], self.scores.indptr[j + 1]
        return self.scores.indices[lo:hi], self.scores.data[lo:hi]


def _canonical(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.eliminate_zeros()
    m.sum_duplicates()
    m.sort_indices()
    return m


def _gram(block: sp.csr_matrix) -> sp.csr_matrix:
    return (block.T @ block).tocsr()


def build_cooccurrence(y: SparseLabelMatrix, workers: int = 1) -> CooccurrenceGraph:
    """Count pairwise label co-occurrences over the rows of a hard matrix.

    With ``workers > 1`` the rows are split into contiguous chunks whose
    integer Gram matrices are summed; integer addition keeps the result
    identical to the sequential build.
    """
    if not y.is_hard():
        raise SoftWeightsPresent("co-occurrence requires a hard (0/1) label matrix")
    ones = y.csr.copy()
    ones.data = np.ones_like(ones.data, dtype=np.int64)
    if workers <= 1 or y.n_rows < 2 * workers:
        counts = _gram(ones)
    else:
        bounds = np.linspace(0, y.n_rows, workers + 1).astype(np.int64)
        blocks = [ones[bounds[w]:bounds[w + 1]] for w in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_gram, blocks))
        counts = parts[0]
        for part in parts[1:]:
            counts = counts + part
    counts = _canonical(counts.astype(np.int64))
    return CooccurrenceGraph(counts)


def conditional(g: CooccurrenceGraph, i: int, j: int) -> float:
    """``P[Y_i = 1 | Y_j = 1]`` estimated as ``G[i, j] / G[j, j]``."""
    n_j = g._require(j)
    return g.count(i, j) / n_j


def symmetrized_similarity(g: CooccurrenceGraph, i: int, j: int) -> float:
    n_i, n_j = g._require(i), g._require(j)
    c = g.count(i, j)
    return 0.5 * (c / n_j + c / n_i)


def top_neighbors(g: CooccurrenceGraph, j: int, k: int) -> list[tuple[int, float]]:
    """The ``k`` labels with highest ``P[i | j]``, ``j`` itself first.

    Remaining ties are broken by ascending label index.
    """
    idx, cond = g.conditional_row(j)
    if k <= 0:
        return []
    others = idx != j
    o_idx, o_cond = idx[others], cond[others]
    order = np.lexsort((o_idx, -o_cond))[: k - 1]
    return [(int(j), 1.0)] + [(int(o_idx[p]), float(o_cond[p])) for p in order]


def transition_matrix(g: CooccurrenceGraph) -> sp.csr_matrix:
    """Row-normalised co-occurrence counts with the self-loops removed."""
    off = g.counts.astype(np.float64).tolil()
    off.setdiag(0.0)
    off = _canonical(off.tocsr())
    deg = np.asarray(off.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return _canonical(sp.diags(inv) @ off)


def build_walk_graph(g: CooccurrenceGraph, restart_prob: float = 0.8,
                     walk_length: int = 3, top_k: int = 100) -> WalkGraph:
    """Truncated random walk with restart from every label.

    The score of ``i`` from start label ``j`` is the restart-weighted
    visitation mass ``sum_t a (1 - a)^t [P^t]_{j,i}`` for ``t = 0..T``. Each
    row keeps its ``top_k`` entries (ties by ascending index) and is divided
    by its maximum. Labels with zero frequency get an empty row.
    """
    if not 0.0 < restart_prob <= 1.0:
        raise ValueError("restart_prob must lie in (0, 1]")
    if walk_length < 1 or top_k < 1:
        raise ValueError("walk_length and top_k must be >= 1")
    L = g.n_labels
    P = transition_matrix(g)
    active = g.frequencies > 0
    start = sp.diags(active.astype(np.float64), format="csr")
    visit = start * restart_prob
    frontier = start
    for t in range(1, walk_length + 1):
        frontier = frontier @ P
        visit = visit + frontier * (restart_prob * (1.0 - restart_prob) ** t)
    visit = _canonical(visit)

    indptr = [0]
    indices: list[np.ndarray] = []
    data: list[np.ndarray] = []
    for j in range(L):
        lo, hi = visit.indptr[j], visit.indptr[j + 1]
        idx, val = visit.indices[lo:hi], visit.data[lo:hi]
        if idx.size > top_k:
            keep = np.sort(np.lexsort((idx, -val))[:top_k])
            idx, val = idx[keep], val[keep]
        if idx.size:
            val = val / val.max()
        indices.append(idx)
        data.append(val)
        indptr.append(indptr[-1] + idx.size)
    scores = sp.csr_matrix(
        (np.concatenate(data) if data else np.zeros(0),
         np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)), shape=(L, L))
    return WalkGraph(scores, float(restart_prob), int(walk_length), int(top_k))


def dump_graph(g: CooccurrenceGraph, path) -> None:
    """Write ``i j count`` lines sorted by ``(i, j)``."""
    c = g.counts
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for i in range(g.n_labels):
            for p in range(c.indptr[i], c.indptr[i + 1]):
                fh.write(f"{i} {c.indices[p]} {c.data[p]}\n")
