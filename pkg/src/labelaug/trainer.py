"""One-vs-all linear classifier over hashed tf-idf features.

Scores are ``s_l(x) = <phi(x), w_l> + b_l``. Training minimises binary
cross-entropy over a per-instance shortlist (all nonzero targets plus
uniformly drawn negatives) with seeded mini-batch SGD. Soft targets are
used directly as BCE targets.
"""
from __future__ import annotations

import logging
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit
from sklearn.feature_extraction.text import HashingVectorizer
from sklearn.preprocessing import normalize

from .dataset_io import Dataset, TextCorpus
from .errors import EmptyDataset
from .metrics import Predictions

log = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"LAUGOVA\0"
CHECKPOINT_VERSION = 1


def _tokenize(text: str) -> list[str]:
    return text.split()


class Featurizer:
    """Hashed uni/bi-gram tf-idf encoder with L2-normalised outputs.

    Tokens are lowercased and split on whitespace. ``idf`` is indexed by
    hash bucket; buckets never seen during fitting get the maximal idf.
    """

    def __init__(self, hash_dim: int = 2 ** 14, ngram_max: int = 2, idf=None):
        if hash_dim <= 0 or hash_dim & (hash_dim - 1):
            raise ValueError("hash_dim must be a power of two")
        if ngram_max not in (1, 2):
            raise ValueError("ngram_max must be 1 or 2")
        self.hash_dim = int(hash_dim)
        self.ngram_max = int(ngram_max)
        self.idf = np.ones(hash_dim) if idf is None else np.asarray(idf, dtype=np.float64)
        self._hasher = HashingVectorizer(
            n_features=self.hash_dim, ngram_range=(1, self.ngram_max),
            lowercase=True, tokenizer=_tokenize, token_pattern=None,
            alternate_sign=False, norm=None, dtype=np.float64)

    def counts(self, texts) -> sp.csr_matrix:
        return self._hasher.transform(list(texts)).tocsr()

    def fit(self, texts) -> "Featurizer":
        tf = self.counts(texts)
        n = tf.shape[0]
        df = np.bincount(tf.indices, minlength=self.hash_dim)
        self.idf = np.log((1.0 + n) / (1.0 + df)) + 1.0
        return self

    def transform(self, texts) -> sp.csr_matrix:
        x = self.counts(texts)
        x.data *= self.idf[x.indices]
        x = normalize(x, norm="l2", copy=False)
        x.sort_indices()
        return x


def featurize(f: Featurizer, text: str) -> sp.csr_matrix:
    """Feature vector of a single text as a ``1 x hash_dim`` row."""
    return f.transform([text])


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 2.0
    negatives_per_instance: int = 10
    seed: int = 0
    hash_dim: int = 2 ** 14
    ngram_max: int = 2
    loss: str = "bce_with_logits"

    def validate(self) -> "TrainConfig":
        if self.negatives_per_instance < 0:
            raise ValueError("negatives_per_instance must be >= 0")
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("invalid epochs / batch_size / learning_rate")
        if self.loss != "bce_with_logits":
            raise ValueError("only bce_with_logits is supported")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


class LinearOvAModel:
    def __init__(self, featurizer: Featurizer, W: np.ndarray, b: np.ndarray):
        self.featurizer = featurizer
        self.W = W  # (hash_dim, n_labels)
        self.b = b

    @property
    def n_labels(self) -> int:
        return self.W.shape[1]

    def scores(self, x: sp.csr_matrix) -> np.ndarray:
        return np.asarray(x @ self.W) + self.b

    def save(self, path) -> None:
        save_model(self, path)


# ---------------------------------------------------------------------------
# loss and SGD kernels
#
# A shortlist is a flat list of (batch position, label, target) pairs: every
# nonzero target of the row, then its sampled negatives minus duplicates.

@njit(cache=True)
def _bce(s, y):
    return max(s, 0.0) - y * s + math.log1p(math.exp(-abs(s)))


@njit(cache=True)
def _sigmoid(s):
    if s >= 0.0:
        return 1.0 / (1.0 + math.exp(-s))
    e = math.exp(s)
    return e / (1.0 + e)


@njit(cache=True)
def _collect_pairs(rows, negatives, y_indptr, y_indices, y_data):
    cap = 0
    for r in range(rows.size):
        cap += y_indptr[rows[r] + 1] - y_indptr[rows[r]] + negatives.shape[1]
    pos = np.empty(cap, dtype=np.int64)
    lab = np.empty(cap, dtype=np.int64)
    tgt = np.empty(cap, dtype=np.float64)
    n = 0
    for r in range(rows.size):
        first = n
        for p in range(y_indptr[rows[r]], y_indptr[rows[r] + 1]):
            pos[n] = r
            lab[n] = y_indices[p]
            tgt[n] = y_data[p]
            n += 1
        for c in range(negatives.shape[1]):
            l = negatives[r, c]
            seen = False
            for q in range(first, n):
                if lab[q] == l:
                    seen = True
                    break
            if not seen:
                pos[n] = r
                lab[n] = l
                tgt[n] = 0.0
                n += 1
    return pos[:n], lab[:n], tgt[:n]


@njit(cache=True)
def _pair_scores(rows, pos, lab, x_indptr, x_indices, x_data, W, b):
    s = np.empty(pos.size)
    for q in range(pos.size):
        i = rows[pos[q]]
        l = lab[q]
        acc = b[l]
        for p in range(x_indptr[i], x_indptr[i + 1]):
            acc += x_data[p] * W[x_indices[p], l]
        s[q] = acc
    return s


@njit(cache=True)
def _scatter(rows, pos, lab, coef, x_indptr, x_indices, x_data, W, b):
    # W[f, l] += coef_q * x_f and b[l] += coef_q, in pair order
    for q in range(pos.size):
        i = rows[pos[q]]
        l = lab[q]
        c = coef[q]
        for p in range(x_indptr[i], x_indptr[i + 1]):
            W[x_indices[p], l] += c * x_data[p]
        b[l] += c


@njit(cache=True)
def _sgd_epoch(order, negatives, batch_size, lr, x_indptr, x_indices, x_data,
               y_indptr, y_indices, y_data, W, b):
    total = 0.0
    n = order.size
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        rows = order[start:stop]
        pos, lab, tgt = _collect_pairs(rows, negatives[start:stop], y_indptr, y_indices, y_data)
        s = _pair_scores(rows, pos, lab, x_indptr, x_indices, x_data, W, b)
        coef = np.empty(s.size)
        step = lr / rows.size
        for q in range(s.size):
            total += _bce(s[q], tgt[q])
            coef[q] = -step * (_sigmoid(s[q]) - tgt[q])
        _scatter(rows, pos, lab, coef, x_indptr, x_indices, x_data, W, b)
    return total


def bce_with_logits(s, y):
    """Elementwise ``-y log sigmoid(s) - (1 - y) log(1 - sigmoid(s))``."""
    s = np.asarray(s, dtype=np.float64)
    return np.logaddexp(0.0, s) - y * s


@dataclass
class Batch:
    """Rows of a mini-batch and their shortlist pairs."""

    rows: np.ndarray
    pos: np.ndarray  # position in ``rows`` of each pair
    labels: np.ndarray
    targets: np.ndarray


def make_batch(y: sp.csr_matrix, rows, negatives) -> Batch:
    rows = np.asarray(rows, dtype=np.int64)
    negatives = np.asarray(negatives, dtype=np.int64).reshape(rows.size, -1)
    pos, lab, tgt = _collect_pairs(rows, negatives, y.indptr.astype(np.int64),
                                   y.indices.astype(np.int64), y.data)
    return Batch(rows, pos, lab, tgt)


def batch_loss_and_grad(W: np.ndarray, b: np.ndarray, x: sp.csr_matrix, batch: Batch):
    """Mean shortlist BCE of a batch and its dense gradients ``(loss, dW, db)``.

    Uses the same kernels as :func:`train`; the gradient of the loss w.r.t.
    each score is ``sigmoid(s) - y``.
    """
    xi, xx, xd = x.indptr.astype(np.int64), x.indices.astype(np.int64), x.data
    s = _pair_scores(batch.rows, batch.pos, batch.labels, xi, xx, xd, W, b)
    n = batch.rows.size
    loss = float(np.sum(bce_with_logits(s, batch.targets))) / n
    dW = np.zeros_like(W)
    db = np.zeros_like(b)
    coef = (1.0 / (1.0 + np.exp(-s)) - batch.targets) / n
    _scatter(batch.rows, batch.pos, batch.labels, coef, xi, xx, xd, dW, db)
    return loss, dW, db


def train(ds: Dataset, cfg: TrainConfig | None = None, featurizer: Featurizer | None = None,
          log_every: int = 0) -> LinearOvAModel:
    """Fit a linear OvA model to ``ds`` (hard or soft targets)."""
    cfg = (cfg or TrainConfig()).validate()
    if ds.n_rows == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if featurizer is None:
        featurizer = Featurizer(cfg.hash_dim, cfg.ngram_max).fit(ds.instances)
    x = featurizer.transform(ds.instances)
    xi, xx, xd = x.indptr.astype(np.int64), x.indices.astype(np.int64), x.data
    y = ds.y.csr
    yi, yx, yd = y.indptr.astype(np.int64), y.indices.astype(np.int64), y.data
    L, n = ds.n_labels, ds.n_rows
    W = np.zeros((featurizer.hash_dim, L))
    b = np.zeros(L)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n).astype(np.int64)
        neg = rng.integers(0, L, size=(n, cfg.negatives_per_instance), dtype=np.int64)
        total = _sgd_epoch(order, neg, cfg.batch_size, cfg.learning_rate,
                           xi, xx, xd, yi, yx, yd, W, b)
        if log_every and (epoch + 1) % log_every == 0:
            log.info("epoch %d: shortlist loss %.4f", epoch + 1, total / n)
    return LinearOvAModel(featurizer, W, b)


# ---------------------------------------------------------------------------
# prediction

def topk_rows(scores: np.ndarray, k: int):
    """Exact top-k per row, ties broken by ascending label index."""
    n, L = scores.shape
    k = min(k, L)
    if k == 0:
        return np.zeros((n, 0), dtype=np.int64), np.zeros((n, 0))
    if k < L:
        part = np.argpartition(-scores, k - 1, axis=1)
        kth = -np.take_along_axis(-scores, part[:, k - 1:k], axis=1)
        cand_mask = scores >= kth
    else:
        cand_mask = np.ones_like(scores, dtype=bool)
    idx = np.zeros((n, k), dtype=np.int64)
    for i in range(n):
        cand = np.flatnonzero(cand_mask[i])
        order = np.lexsort((cand, -scores[i, cand]))[:k]
        idx[i] = cand[order]
    return idx, np.take_along_axis(scores, idx, axis=1)


def predict(m: LinearOvAModel, texts, top_k: int = 5, batch_size: int = 1024, workers: int = 1) -> Predictions:
    """Full-scan top-k prediction; output independent of batching/workers."""
    texts = list(texts)
    if top_k > m.n_labels:
        raise ValueError(f"top_k={top_k} exceeds {m.n_labels} labels")
    chunks = [texts[i:i + batch_size] for i in range(0, len(texts), batch_size)]

    def run(chunk):
        return topk_rows(m.scores(m.featurizer.transform(chunk)), top_k)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    if not parts:
        return Predictions(np.zeros((0, top_k), dtype=np.int64), np.zeros((0, top_k)))
    return Predictions(np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts]))


# ---------------------------------------------------------------------------
# checkpoints
#
# little-endian: magic[8] version:u32 hash_dim:u64 n_labels:u64 ngram_max:u32
# then idf f64[hash_dim], W f64[hash_dim * n_labels] row-major, b f64[n_labels]

_HEADER = struct.Struct("<8sIQQI")


def save_model(m: LinearOvAModel, path) -> None:
    f = m.featurizer
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, f.hash_dim, m.n_labels, f.ngram_max))
        fh.write(np.ascontiguousarray(f.idf, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(m.W, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(m.b, dtype="<f8").tobytes())


def load_model(path) -> LinearOvAModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated checkpoint")
    magic, version, hash_dim, n_labels, ngram_max = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError("not a model checkpoint")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    expected = _HEADER.size + 8 * (hash_dim + hash_dim * n_labels + n_labels)
    if len(raw) != expected:
        raise ValueError("checkpoint size does not match its header")
    off = _HEADER.size
    idf = np.frombuffer(raw, "<f8", hash_dim, off).astype(np.float64)
    off += 8 * hash_dim
    W = np.frombuffer(raw, "<f8", hash_dim * n_labels, off).reshape(hash_dim, n_labels).astype(np.float64)
    off += 8 * hash_dim * n_labels
    b = np.frombuffer(raw, "<f8", n_labels, off).astype(np.float64)
    return LinearOvAModel(Featurizer(hash_dim, ngram_max, idf), W, b)
