"""Seeded synthetic short-text XMC benchmark with correlated, long-tailed labels.

Labels are grouped into clusters; every label has a unique stem word and
each topic word is shared by ``clusters_per_topic`` clusters. A label's
feature text is ``"<topic> <stem>"``. Instances draw all their labels from
one cluster, so labels of a cluster co-occur. Instance text holds the topic
word (with probability ``topic_keep``), each label's stem (with probability
``stem_keep``) and a few noise words.

Label frequencies follow a Zipf curve over a random label ranking; labels
in the bottom half by frequency get at most ``tail_max`` training positives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset_io import Dataset, SparseLabelMatrix, TextCorpus

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


@dataclass
class SyntheticSpec:
    n_instances: int = 2000
    n_labels: int = 400
    n_clusters: int = 80
    zipf_exponent: float = 0.6
    tail_max: int = 3
    labels_per_instance: float = 2.0
    stem_keep: float = 0.5
    topic_keep: float = 0.5
    clusters_per_topic: int = 2
    noise_words: tuple = (1, 3)
    noise_vocab: int = 300
    test_fraction: float = 0.5


def _words(rng, count: int, syllables: int, taken: set) -> list[str]:
    out = []
    while len(out) < count:
        w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS))
                    for _ in range(syllables))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def zipf_frequencies(n_labels: int, n_instances: int, exponent: float, tail_max: int,
                     labels_per_instance: float) -> np.ndarray:
    """Frequencies by rank, scaled to roughly ``n * labels_per_instance`` positives."""
    ranks = np.arange(1, n_labels + 1, dtype=np.float64)
    shape = ranks ** -exponent
    scale = n_instances * labels_per_instance / shape.sum()
    freq = np.maximum(1, np.round(scale * shape)).astype(np.int64)
    tail = np.arange(n_labels) >= n_labels // 2
    freq[tail] = np.minimum(freq[tail], tail_max)
    return freq


def _instance_counts(totals, heads, n_instances):
    """Instances per cluster: between the head frequency and the total volume."""
    totals = np.asarray(totals, dtype=np.float64)
    lo = np.asarray(heads, dtype=np.int64)
    hi = totals.astype(np.int64)
    if n_instances < lo.sum() or n_instances > hi.sum():
        raise ValueError("cannot place the requested number of instances")
    share = totals / totals.sum() * n_instances
    m = np.clip(np.floor(share).astype(np.int64), lo, hi)
    order = np.argsort(-(share - np.floor(share)), kind="stable")
    while m.sum() != n_instances:
        step = 1 if m.sum() < n_instances else -1
        for c in order:
            if m.sum() == n_instances:
                break
            if lo[c] <= m[c] + step <= hi[c]:
                m[c] += step
    return m


def _assign(rng, members, freq, m):
    """Spread each label's occurrences over ``m`` instances, none left empty."""
    rows = [[] for _ in range(m)]
    load = np.zeros(m, dtype=np.int64)
    for l in sorted(members, key=lambda l: (-freq[l], l)):
        jitter = rng.random(m)
        pick = np.lexsort((jitter, load))[: freq[l]]
        for r in pick:
            rows[r].append(int(l))
        load[pick] += 1
    return [sorted(r) for r in rows]


def _texts(rng, rows, cluster_of, topic, stem, noise, spec):
    texts = []
    for labels in rows:
        toks = []
        if labels and rng.random() < spec.topic_keep:
            toks.append(topic[cluster_of[labels[0]]])
        for l in labels:
            if rng.random() < spec.stem_keep:
                toks.append(stem[l])
        lo, hi = spec.noise_words
        k = int(rng.integers(lo, hi + 1))
        # Zipf-ish noise: frequent words dominate
        ranks = rng.zipf(1.3, size=k) % len(noise)
        toks.extend(noise[r] for r in ranks)
        rng.shuffle(toks)
        texts.append(" ".join(toks))
    return texts


def _split_rows(rng, clusters, freq, cluster_of, n_instances):
    totals = np.array([freq[c].sum() for c in clusters])
    heads = np.array([freq[c].max() for c in clusters])
    m = _instance_counts(totals, heads, n_instances)
    rows = []
    for c, members in enumerate(clusters):
        rows.extend(_assign(rng, members, freq, int(m[c])))
    perm = rng.permutation(len(rows))
    return [rows[i] for i in perm]


def make_synthetic(seed: int = 0, spec: SyntheticSpec | None = None):
    """Return ``(train, test)`` datasets sharing one label space."""
    spec = spec or SyntheticSpec()
    rng = np.random.Generator(np.random.PCG64(seed))
    L, K = spec.n_labels, spec.n_clusters
    taken: set = set()
    n_topics = math.ceil(K / spec.clusters_per_topic)
    topic = np.repeat(_words(rng, n_topics, 2, taken), spec.clusters_per_topic)[:K]
    topic = [str(t) for t in topic[rng.permutation(K)]]
    stem = _words(rng, L, 3, taken)
    noise = _words(rng, spec.noise_vocab, 2, taken)

    by_rank = zipf_frequencies(L, spec.n_instances, spec.zipf_exponent, spec.tail_max,
                               spec.labels_per_instance)
    label_at_rank = rng.permutation(L)
    freq = np.empty(L, dtype=np.int64)
    freq[label_at_rank] = by_rank
    cluster_of = np.repeat(np.arange(K), math.ceil(L / K))[:L]
    cluster_of = cluster_of[rng.permutation(L)]
    clusters = [np.flatnonzero(cluster_of == c) for c in range(K)]

    train_rows = _split_rows(rng, clusters, freq, cluster_of, spec.n_instances)
    test_freq = np.maximum(1, np.ceil(freq * spec.test_fraction)).astype(np.int64)
    n_test = int(round(spec.n_instances * spec.test_fraction))
    n_test = max(n_test, int(sum(test_freq[c].max() for c in clusters)))
    n_test = min(n_test, int(test_freq.sum()))
    test_rows = _split_rows(rng, clusters, test_freq, cluster_of, n_test)

    label_texts = TextCorpus(tuple(f"{topic[cluster_of[l]]} {stem[l]}" for l in range(L)))
    train = Dataset(TextCorpus(tuple(_texts(rng, train_rows, cluster_of, topic, stem, noise, spec))),
                    label_texts, SparseLabelMatrix.from_rows(train_rows, L), name=f"synthetic{seed}.trn")
    test = Dataset(TextCorpus(tuple(_texts(rng, test_rows, cluster_of, topic, stem, noise, spec))),
                   label_texts, SparseLabelMatrix.from_rows(test_rows, L), name=f"synthetic{seed}.tst")
    return train, test
