"""Label-feature training instances with co-occurrence soft targets.

Every label ``j`` with at least one training positive becomes a new
instance whose text is the label's own feature text and whose targets
come from the co-occurrence graph:

* ``gandalf``: ``P[i | j]`` where it exceeds ``delta`` (always ``1`` for ``j``)
* ``self_annotation``: one-hot on ``j``
* ``glas``: ``sigmoid(S[i, j])`` where the symmetrised similarity exceeds
  ``delta``

The module also builds the combined set, equal-size uniform subsamples of
it and label subsets used for the subsampling ablation.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from .dataset_io import (
    Dataset,
    SparseLabelMatrix,
    TextCorpus,
    concat_datasets,
    write_label_matrix,
    write_text_corpus,
)
from .errors import ConfigError, SampleTooLarge, ZeroFrequencyLabel
from .label_graph import CooccurrenceGraph, WalkGraph, build_cooccurrence, build_walk_graph

TARGET_KINDS = ("gandalf", "self_annotation", "glas")
GRAPH_KINDS = ("cooccurrence", "random_walk")
SAMPLING_SCHEMES = ("all", "random", "tail_binned")
PRNG_NAME = "numpy.random.PCG64"
N_FREQUENCY_BINS = 5


@dataclass
class AugmentConfig:
    delta: float = 0.1
    target_kind: str = "gandalf"
    graph_kind: str = "cooccurrence"
    label_fraction: float = 1.0
    sampling_scheme: str = "all"
    seed: int = 0
    walk_restart_prob: float = 0.8
    walk_length: int = 3
    walk_top_k: int = 100

    def validate(self) -> "AugmentConfig":
        if not 0.0 <= self.delta < 1.0:
            raise ConfigError(f"delta must lie in [0, 1), got {self.delta}")
        if self.target_kind not in TARGET_KINDS:
            raise ConfigError(f"target_kind must be one of {TARGET_KINDS}")
        if self.graph_kind not in GRAPH_KINDS:
            raise ConfigError(f"graph_kind must be one of {GRAPH_KINDS}")
        if self.sampling_scheme not in SAMPLING_SCHEMES:
            raise ConfigError(f"sampling_scheme must be one of {SAMPLING_SCHEMES}")
        if not 0.0 < self.label_fraction <= 1.0:
            raise ConfigError("label_fraction must lie in (0, 1]")
        if self.sampling_scheme == "all" and self.label_fraction != 1.0:
            raise ConfigError("label_fraction must be 1 when sampling_scheme is 'all'")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def gandalf_targets(g: CooccurrenceGraph, j: int, delta: float = 0.1) -> dict[int, float]:
    """Thresholded conditional co-occurrence targets for label ``j``."""
    idx, cond = g.conditional_row(j)
    keep = cond > delta
    return {int(i): float(c) for i, c in zip(idx[keep], cond[keep])}


def walk_targets(w: WalkGraph, j: int, delta: float = 0.1) -> dict[int, float]:
    """Thresholded random-walk scores for label ``j`` (self weight pinned to 1)."""
    idx, val = w.row(j)
    if idx.size == 0:
        raise ZeroFrequencyLabel(j)
    out = {int(i): float(v) for i, v in zip(idx, val) if v > delta}
    out[int(j)] = 1.0
    return dict(sorted(out.items()))


def self_annotation_targets(j: int) -> dict[int, float]:
    return {int(j): 1.0}


def glas_targets(g: CooccurrenceGraph, j: int, delta: float = 0.1) -> dict[int, float]:
    """``sigmoid(S[i, j])`` for every ``i`` whose similarity exceeds ``delta``.

    The threshold is applied before the sigmoid so that non-co-occurring
    pairs stay absent rather than receiving ``sigmoid(0) = 0.5``.
    """
    idx, sim = g.similarity_row(j)
    keep = sim > delta
    return {int(i): float(v) for i, v in zip(idx[keep], sigmoid(sim[keep]))}


# ---------------------------------------------------------------------------
# label selection

def equivoluminous_bins(freq, n_bins: int) -> np.ndarray:
    """Assign labels to ``n_bins`` bins of equal total frequency.

    Labels are ordered by ascending frequency (ties by index); a label goes
    to the bin holding the first unit of its volume. Bin 0 is the tail.
    Returns the bin id of every label.
    """
    freq = np.asarray(freq, dtype=np.int64)
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    order = np.lexsort((np.arange(freq.size), freq))
    sorted_freq = freq[order]
    start = np.cumsum(sorted_freq) - sorted_freq
    total = int(sorted_freq.sum())
    bins_sorted = np.zeros(freq.size, dtype=np.int64)
    if total > 0:
        # integer arithmetic keeps bin edges exact
        bins_sorted = np.minimum(start * n_bins // total, n_bins - 1)
    out = np.empty(freq.size, dtype=np.int64)
    out[order] = bins_sorted
    return out


def select_labels(freq, fraction: float, scheme: str = "random", seed: int = 0) -> np.ndarray:
    """Pick the labels that receive an augmented instance.

    ``random`` keeps each active label independently with probability
    ``fraction``. ``tail_binned`` walks the equi-voluminous frequency bins
    from the tail upwards, taking whole bins until ``ceil(fraction * L)``
    labels are chosen and sampling uniformly inside the last, partially
    used bin. Returns sorted label indices.
    """
    freq = np.asarray(freq, dtype=np.int64)
    active = np.flatnonzero(freq > 0)
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    if fraction == 1.0 or scheme == "all":
        return active
    rng = np.random.Generator(np.random.PCG64(seed))
    if scheme == "random":
        keep = rng.random(active.size) < fraction
        return active[keep]
    if scheme != "tail_binned":
        raise ValueError(f"unknown sampling scheme {scheme!r}")
    target = math.ceil(fraction * active.size)
    bins = equivoluminous_bins(freq[active], N_FREQUENCY_BINS)
    chosen: list[np.ndarray] = []
    remaining = target
    for b in range(N_FREQUENCY_BINS):
        members = active[bins == b]
        if remaining <= 0:
            break
        if members.size <= remaining:
            chosen.append(members)
            remaining -= members.size
        else:
            chosen.append(rng.choice(members, size=remaining, replace=False))
            remaining = 0
    if not chosen:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(chosen))


# ---------------------------------------------------------------------------
# datasets

@dataclass
class AugmentResult:
    dataset: Dataset
    labels: np.ndarray  # label index behind each augmented row
    skipped: int  # selected labels without training positives


def build_augmented(ds: Dataset, cfg: AugmentConfig | None = None,
                    graph: CooccurrenceGraph | None = None, workers: int = 1) -> AugmentResult:
    """Build the label-feature dataset for ``ds`` under ``cfg``.

    Rows follow ascending label index. Selected labels without training
    positives are skipped and counted.
    """
    cfg = (cfg or AugmentConfig()).validate()
    if graph is None:
        graph = build_cooccurrence(ds.y, workers=workers)
    freq = graph.frequencies
    if cfg.sampling_scheme == "all":
        selected = np.arange(ds.n_labels)
    else:
        selected = select_labels(freq, cfg.label_fraction, cfg.sampling_scheme, cfg.seed)

    walk = None
    if cfg.graph_kind == "random_walk" and cfg.target_kind != "self_annotation":
        walk = build_walk_graph(graph, cfg.walk_restart_prob, cfg.walk_length, cfg.walk_top_k)

    rows, labels, skipped = [], [], 0
    for j in selected:
        j = int(j)
        if freq[j] == 0:
            skipped += 1
            continue
        if cfg.target_kind == "self_annotation":
            row = self_annotation_targets(j)
        elif cfg.target_kind == "glas":
            row = _glas_from_walk(walk, j, cfg.delta) if walk else glas_targets(graph, j, cfg.delta)
        elif walk is not None:
            row = walk_targets(walk, j, cfg.delta)
        else:
            row = gandalf_targets(graph, j, cfg.delta)
        rows.append(row)
        labels.append(j)

    y = SparseLabelMatrix.from_rows(rows, ds.n_labels) if rows else SparseLabelMatrix.empty(ds.n_labels)
    texts = TextCorpus(tuple(ds.label_features[j] for j in labels))
    z = Dataset(texts, ds.label_features, y, name=f"{ds.name}.Z")
    return AugmentResult(z, np.asarray(labels, dtype=np.int64), skipped)


def _glas_from_walk(w: WalkGraph, j: int, delta: float) -> dict[int, float]:
    row = walk_targets(w, j, delta)
    return {i: float(sigmoid(v)) for i, v in row.items()}


def combine(ds: Dataset, z: Dataset) -> Dataset:
    return concat_datasets(ds, z, name=f"{ds.name}.G")


def uniform_subsample(gds: Dataset, n: int, seed: int = 0) -> Dataset:
    """``n`` rows drawn without replacement, original order preserved."""
    if n > gds.n_rows:
        raise SampleTooLarge(f"cannot draw {n} rows from {gds.n_rows}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = np.sort(rng.choice(gds.n_rows, size=n, replace=False))
    return gds.take_rows(rows, name=f"{gds.name}.U{n}")


def write_augmented(result: AugmentResult, cfg: AugmentConfig, out_dir, extra: dict | None = None) -> dict:
    """Write ``Z_X_Y.txt``, ``Z.raw.txt`` and ``augment_manifest.json``."""
    os.makedirs(out_dir, exist_ok=True)
    write_label_matrix(result.dataset.y, os.path.join(out_dir, "Z_X_Y.txt"))
    write_text_corpus(result.dataset.instances, os.path.join(out_dir, "Z.raw.txt"))
    manifest = {
        "config": cfg.to_dict(),
        "delta": cfg.delta,
        "target_kind": cfg.target_kind,
        "seed": cfg.seed,
        "prng": PRNG_NAME,
        "rows": result.dataset.n_rows,
        "skipped_labels": result.skipped,
        "n_labels": result.dataset.n_labels,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "augment_manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
