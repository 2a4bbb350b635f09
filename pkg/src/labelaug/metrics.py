"""Ranking metrics for extreme multi-label predictions.

P@k, propensity-scored PSP@k, label coverage C@k and the per-frequency-bin
decomposition of P@k. Predictions are top-K label lists per instance;
ground truth is a hard :class:`~labelaug.dataset_io.SparseLabelMatrix`.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .augmentor import equivoluminous_bins
from .dataset_io import SparseLabelMatrix
from .errors import DatasetFormatError, EmptyTestPositives, KExceedsPredictionDepth, MalformedHeader

DEFAULT_KS = (1, 3, 5)


@dataclass(frozen=True)
class Predictions:
    """Top-K labels per instance, scores non-increasing along each row."""

    indices: np.ndarray  # (n, K) int64
    scores: np.ndarray  # (n, K) float64

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(len(self.indices), -1)
        sc = np.asarray(self.scores, dtype=np.float64).reshape(idx.shape)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "scores", sc)
        if idx.size:
            if np.any(np.diff(sc, axis=1) > 0):
                raise ValueError("scores must be non-increasing within each row")
            srt = np.sort(idx, axis=1)
            if np.any(srt[:, 1:] == srt[:, :-1]):
                raise ValueError("labels must be unique within each row")

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def depth(self) -> int:
        return self.indices.shape[1]

    def top(self, k: int) -> np.ndarray:
        if k > self.depth:
            raise KExceedsPredictionDepth(f"k={k} exceeds prediction depth {self.depth}")
        return self.indices[:, :k]


@dataclass(frozen=True)
class PropensityVector:
    p: np.ndarray
    A: float
    B: float
    n_train: int

    @property
    def inverse(self) -> np.ndarray:
        return 1.0 / self.p


@dataclass
class BinRow:
    bin: int
    n_labels: int
    mean_positives: float
    contribution: float


@dataclass
class EvalReport:
    metrics: dict
    bins: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"metrics": dict(self.metrics),
                "bins": [vars(b) if isinstance(b, BinRow) else dict(b) for b in self.bins]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """One row in percent, columns ordered P@k, PSP@k, C@k."""
        names = _ordered_names(self.metrics)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        w.writerow([f"{100.0 * self.metrics[n]:.2f}" for n in names])
        return buf.getvalue()

    def bins_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin", "n_labels", "mean_positives", "contribution"])
        for b in self.to_dict()["bins"]:
            w.writerow([b["bin"], b["n_labels"], f"{b['mean_positives']:.4f}",
                        f"{b['contribution']:.6f}"])
        return buf.getvalue()


def _ordered_names(metrics) -> list[str]:
    def key(name):
        family, k = name.split("@")
        return ({"P": 0, "PSP": 1, "C": 2}.get(family, 3), int(k))
    return sorted(metrics, key=key)


def _hits(pred: Predictions, truth: SparseLabelMatrix, k: int) -> np.ndarray:
    """Boolean ``(n, k)`` matrix: is the predicted label a positive?"""
    if pred.n != truth.n_rows:
        raise ValueError(f"{pred.n} prediction rows vs {truth.n_rows} truth rows")
    top = pred.top(k)
    csr = truth.csr
    out = np.zeros(top.shape, dtype=bool)
    for i in range(pred.n):
        lo, hi = csr.indptr[i], csr.indptr[i + 1]
        if hi > lo:
            out[i] = np.isin(top[i], csr.indices[lo:hi])
    return out


def precision_at_k(pred: Predictions, truth: SparseLabelMatrix, k: int) -> float:
    hits = _hits(pred, truth, k)
    return int(hits.sum()) / (k * pred.n) if pred.n else 0.0


def build_propensities(train_truth: SparseLabelMatrix, A: float = 0.55, B: float = 1.5) -> PropensityVector:
    """Jain et al. propensities ``1 / (1 + C (n_l + B)^-A)``.

    ``C = (ln N - 1) (B + 1)^A``. For ``N <= e`` the constant would turn
    negative, so it is clipped to zero (every propensity becomes 1).
    """
    if A <= 0 or B < 0:
        raise ValueError("require A > 0 and B >= 0")
    n = train_truth.n_rows
    freq = train_truth.label_frequencies().astype(np.float64)
    c = max(math.log(n) - 1.0, 0.0) * (B + 1.0) ** A if n > 0 else 0.0
    if c == 0.0:
        p = np.ones_like(freq)
    else:
        with np.errstate(divide="ignore"):
            p = 1.0 / (1.0 + c * np.power(freq + B, -A))
        # B = 0 with an unseen label would give p = 0
        p = np.maximum(p, np.finfo(np.float64).tiny)
    return PropensityVector(p, float(A), float(B), int(n))


def psp_at_k(pred: Predictions, truth: SparseLabelMatrix, prop: PropensityVector, k: int) -> float:
    """Propensity-scored precision normalised by the ideal ranking.

    Ratio of the mean gain of the predicted top-k to the mean gain of the
    best achievable top-k (positives sorted by descending ``1 / p``).
    """
    hits = _hits(pred, truth, k)
    inv = prop.inverse
    top = pred.top(k)
    gained = math.fsum((inv[top] * hits).ravel().tolist())
    csr = truth.csr
    ideal_terms = []
    for i in range(truth.n_rows):
        w = inv[csr.indices[csr.indptr[i]:csr.indptr[i + 1]]]
        if w.size:
            ideal_terms.extend(np.sort(w)[::-1][:k].tolist())
    ideal = math.fsum(ideal_terms)
    if ideal == 0.0:
        raise EmptyTestPositives("no test positives to normalise PSP@k")
    return gained / ideal


def coverage_at_k(pred: Predictions, truth: SparseLabelMatrix, k: int, correct_only: bool = True) -> float:
    """Fraction of test-relevant labels hit by at least one top-k prediction.

    With ``correct_only=False`` a label counts once it appears in any top-k
    list, whether or not it is a positive of that instance.
    """
    relevant = np.unique(truth.csr.indices)
    if relevant.size == 0:
        raise EmptyTestPositives("no test positives")
    top = pred.top(k)
    if correct_only:
        covered = np.unique(top[_hits(pred, truth, k)])
    else:
        covered = np.intersect1d(np.unique(top), relevant)
    return covered.size / relevant.size


def bin_contributions(pred: Predictions, truth: SparseLabelMatrix, train_freq, n_bins: int = 5,
                      k: int = 5) -> list[BinRow]:
    """Additive split of P@k over equi-voluminous train-frequency bins.

    Bin 0 holds the rarest labels. Contributions sum to P@k.
    """
    train_freq = np.asarray(train_freq, dtype=np.int64)
    bins = equivoluminous_bins(train_freq, n_bins)
    hits = _hits(pred, truth, k)
    hit_labels = pred.top(k)[hits]
    per_bin = np.bincount(bins[hit_labels], minlength=n_bins)
    denom = k * pred.n
    rows = []
    for b in range(n_bins):
        members = bins == b
        count = int(members.sum())
        rows.append(BinRow(
            bin=b,
            n_labels=count,
            mean_positives=float(train_freq[members].mean()) if count else 0.0,
            contribution=int(per_bin[b]) / denom if denom else 0.0,
        ))
    return rows


def evaluate(pred: Predictions, truth: SparseLabelMatrix, prop: PropensityVector, train_freq=None,
             ks=DEFAULT_KS, n_bins: int = 5, bin_k: int = 5, correct_only: bool = True) -> EvalReport:
    metrics = {}
    for k in ks:
        metrics[f"P@{k}"] = precision_at_k(pred, truth, k)
        metrics[f"PSP@{k}"] = psp_at_k(pred, truth, prop, k)
        metrics[f"C@{k}"] = coverage_at_k(pred, truth, k, correct_only=correct_only)
    bins = []
    if train_freq is not None and bin_k <= pred.depth:
        bins = bin_contributions(pred, truth, train_freq, n_bins, bin_k)
    return EvalReport(metrics, bins)


# ---------------------------------------------------------------------------
# prediction files

def format_predictions(pred: Predictions) -> str:
    lines = [f"{pred.n} {pred.depth}"]
    for idx, sc in zip(pred.indices, pred.scores):
        lines.append(" ".join(f"{j}:{s:.6f}" for j, s in zip(idx, sc)))
    return "\n".join(lines) + "\n"


def write_predictions(pred: Predictions, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_predictions(pred))


def read_predictions(path) -> Predictions:
    """Read a prediction file; the file order defines the ranking."""
    with open(path, encoding="ascii") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    head = lines[0].split() if lines else []
    if len(head) != 2 or not all(h.isdigit() for h in head):
        raise MalformedHeader("expected '<N> <K>'", line=1, path=path)
    n, depth = int(head[0]), int(head[1])
    if len(lines) - 1 != n:
        raise DatasetFormatError(f"header declares {n} rows, found {len(lines) - 1}", path=path)
    indices = np.zeros((n, depth), dtype=np.int64)
    scores = np.zeros((n, depth), dtype=np.float64)
    for r, line in enumerate(lines[1:]):
        toks = line.split()
        if len(toks) != depth:
            raise DatasetFormatError(f"expected {depth} entries", line=r + 2, path=path)
        for c, tok in enumerate(toks):
            j, _, s = tok.partition(":")
            indices[r, c] = int(j)
            scores[r, c] = float(s)
    # rounding may create ties but never reorders; keep file order
    scores = np.minimum.accumulate(scores, axis=1) if depth else scores
    return Predictions(indices, scores)
