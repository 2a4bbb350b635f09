"""Sparse label matrices, raw-text corpora and their on-disk formats.

Label matrices use the Extreme Classification Repository convention::

    <n_rows> <n_labels>
    <index>:<weight> <index>:<weight> ...
    ...

one line per row, an empty line for a row without labels. Weights are
written with six decimals, except a weight of one which is written as
``1``. Text corpora are UTF-8 files with one text per line.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DatasetFormatError,
    IndexOutOfRange,
    InvalidUtf8,
    LabelSpaceMismatch,
    MalformedEntry,
    MalformedHeader,
    NonAscendingIndices,
    RowCountMismatch,
    WeightOutOfRange,
)

log = logging.getLogger(__name__)

WEIGHT_DECIMALS = 6
_MIN_WEIGHT = 10.0 ** -WEIGHT_DECIMALS


class SparseLabelMatrix:
    """Row-major sparse ``n_rows x n_labels`` matrix of weights in (0, 1].

    Backed by a canonical ``scipy.sparse.csr_matrix`` (sorted indices, no
    duplicates, no explicit zeros). Treat instances as immutable.
    """

    __slots__ = ("csr",)

    def __init__(self, csr, validate=True):
        csr = sp.csr_matrix(csr, dtype=np.float64)
        csr.sum_duplicates()
        csr.sort_indices()
        csr.indices = csr.indices.astype(np.int64, copy=False)
        csr.indptr = csr.indptr.astype(np.int64, copy=False)
        self.csr = csr
        if validate:
            self.validate()

    @classmethod
    def from_rows(cls, rows: Sequence, n_labels: int) -> "SparseLabelMatrix":
        """Build from an iterable of ``{label: weight}`` dicts or label lists."""
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for row in rows:
            if isinstance(row, dict):
                items = sorted(row.items())
            else:
                items = [(int(j), 1.0) for j in sorted(row)]
            for j, w in items:
                indices.append(int(j))
                data.append(float(w))
            indptr.append(len(indices))
        csr = sp.csr_matrix(
            (np.asarray(data, dtype=np.float64),
             np.asarray(indices, dtype=np.int64),
             np.asarray(indptr, dtype=np.int64)),
            shape=(len(indptr) - 1, n_labels))
        return cls(csr)

    @classmethod
    def empty(cls, n_labels: int) -> "SparseLabelMatrix":
        return cls(sp.csr_matrix((0, n_labels), dtype=np.float64))

    @property
    def n_rows(self) -> int:
        return self.csr.shape[0]

    @property
    def n_labels(self) -> int:
        return self.csr.shape[1]

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    @property
    def shape(self):
        return self.csr.shape

    def row(self, i):
        """Return ``(indices, weights)`` views of row ``i``."""
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        return self.csr.indices[lo:hi], self.csr.data[lo:hi]

    def row_dict(self, i) -> dict:
        idx, w = self.row(i)
        return {int(j): float(v) for j, v in zip(idx, w)}

    def to_rows(self) -> list[dict]:
        return [self.row_dict(i) for i in range(self.n_rows)]

    def is_hard(self) -> bool:
        return bool(np.all(self.csr.data == 1.0))

    def label_frequencies(self) -> np.ndarray:
        """Number of rows in which each label has a nonzero weight."""
        return np.bincount(self.csr.indices, minlength=self.n_labels).astype(np.int64)

    def take_rows(self, rows) -> "SparseLabelMatrix":
        return SparseLabelMatrix(self.csr[np.asarray(rows, dtype=np.int64)], validate=False)

    def validate(self):
        if self.nnz:
            if self.csr.indices.min() < 0 or self.csr.indices.max() >= self.n_labels:
                raise ValueError("label index out of range")
            if np.any(self.csr.data <= 0.0) or np.any(self.csr.data > 1.0):
                raise ValueError("weights must lie in (0, 1]")

    def __eq__(self, other):
        if not isinstance(other, SparseLabelMatrix):
            return NotImplemented
        a, b = self.csr, other.csr
        return (a.shape == b.shape
                and np.array_equal(a.indptr, b.indptr)
                and np.array_equal(a.indices, b.indices)
                and np.array_equal(a.data, b.data))

    def __repr__(self):
        return f"SparseLabelMatrix(n_rows={self.n_rows}, n_labels={self.n_labels}, nnz={self.nnz})"


@dataclass(frozen=True)
class TextCorpus:
    """Ordered list of single-line UTF-8 texts."""

    texts: tuple = ()

    def __post_init__(self):
        texts = tuple(self.texts)
        for i, t in enumerate(texts):
            if not isinstance(t, str):
                raise TypeError(f"text {i} is not a string")
            if "\n" in t:
                raise ValueError(f"text {i} contains a newline")
        object.__setattr__(self, "texts", texts)

    def __len__(self):
        return len(self.texts)

    def __getitem__(self, i):
        return self.texts[i]

    def __iter__(self):
        return iter(self.texts)

    def take(self, rows) -> "TextCorpus":
        return TextCorpus(tuple(self.texts[int(i)] for i in rows))


@dataclass(frozen=True)
class Dataset:
    """Instance texts, label-feature texts and the instance label matrix."""

    instances: TextCorpus
    label_features: TextCorpus
    y: SparseLabelMatrix
    name: str = field(default="dataset")

    def __post_init__(self):
        if self.y.n_rows != len(self.instances):
            raise ValueError(
                f"{self.y.n_rows} label rows but {len(self.instances)} instance texts")
        if self.y.n_labels != len(self.label_features):
            raise ValueError(
                f"{self.y.n_labels} labels but {len(self.label_features)} label texts")

    @property
    def n_rows(self) -> int:
        return self.y.n_rows

    @property
    def n_labels(self) -> int:
        return self.y.n_labels

    def take_rows(self, rows, name=None) -> "Dataset":
        return Dataset(self.instances.take(rows), self.label_features,
                       self.y.take_rows(rows), name or self.name)


# ---------------------------------------------------------------------------
# label matrices

def quantize_weight(w: float) -> float:
    """Value a weight takes after a write/read round trip."""
    return float(format_weight(w))


def format_weight(w: float) -> str:
    s = f"{w:.{WEIGHT_DECIMALS}f}"
    if s == "1.000000":
        return "1"
    if s == "0.000000":
        # keep the entry inside (0, 1] instead of silently dropping it
        return f"{_MIN_WEIGHT:.{WEIGHT_DECIMALS}f}"
    return s


def quantize(m: SparseLabelMatrix) -> SparseLabelMatrix:
    csr = m.csr.copy()
    csr.data = np.array([quantize_weight(w) for w in csr.data], dtype=np.float64)
    return SparseLabelMatrix(csr, validate=False)


def format_label_matrix(m: SparseLabelMatrix) -> str:
    csr = m.csr
    lines = [f"{m.n_rows} {m.n_labels}"]
    indptr, indices, data = csr.indptr, csr.indices, csr.data
    for i in range(m.n_rows):
        lo, hi = indptr[i], indptr[i + 1]
        lines.append(" ".join(
            f"{indices[p]}:{format_weight(data[p])}" for p in range(lo, hi)))
    return "\n".join(lines) + "\n"


def write_label_matrix(m: SparseLabelMatrix, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_label_matrix(m))


def _split_lines(text: str) -> list[str]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def parse_label_matrix(text: str, path=None) -> SparseLabelMatrix:
    lines = _split_lines(text)
    if not lines:
        raise MalformedHeader("empty file, expected '<n_rows> <n_labels>'", line=1, path=path)
    head = lines[0].split()
    if len(head) != 2 or not all(h.isdigit() for h in head):
        raise MalformedHeader(f"expected '<n_rows> <n_labels>', got {lines[0]!r}",
                              line=1, path=path)
    n_rows, n_labels = int(head[0]), int(head[1])
    body = lines[1:]
    if len(body) != n_rows:
        raise RowCountMismatch(f"header declares {n_rows} rows, found {len(body)}",
                               line=len(lines), path=path)

    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    indices: list[int] = []
    data: list[float] = []
    for r, line in enumerate(body):
        lineno = r + 2
        prev = -1
        for tok in line.split():
            idx_s, sep, w_s = tok.partition(":")
            if not sep or not idx_s.isdigit():
                raise MalformedEntry(f"bad entry {tok!r}", line=lineno, path=path)
            try:
                w = float(w_s)
            except ValueError:
                raise MalformedEntry(f"bad weight in {tok!r}", line=lineno, path=path) from None
            j = int(idx_s)
            if j >= n_labels:
                raise IndexOutOfRange(lineno, j, n_labels, path=path)
            if j <= prev:
                raise NonAscendingIndices(f"index {j} follows {prev}", line=lineno, path=path)
            if not (0.0 < w <= 1.0):
                raise WeightOutOfRange(f"weight {w_s} not in (0, 1]", line=lineno, path=path)
            indices.append(j)
            data.append(w)
            prev = j
        indptr[r + 1] = len(indices)
    csr = sp.csr_matrix((np.asarray(data, dtype=np.float64),
                         np.asarray(indices, dtype=np.int64), indptr),
                        shape=(n_rows, n_labels))
    return SparseLabelMatrix(csr, validate=False)


def read_label_matrix(path) -> SparseLabelMatrix:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        line = raw[:exc.start].count(b"\n") + 1
        raise MalformedEntry("non-ASCII byte in label matrix", line=line, path=path) from None
    return parse_label_matrix(text, path=path)


# ---------------------------------------------------------------------------
# text corpora

def read_text_corpus(path) -> TextCorpus:
    with open(path, "rb") as fh:
        raw = fh.read()
    texts = []
    for lineno, chunk in enumerate(_split_bytes(raw), start=1):
        try:
            texts.append(chunk.decode("utf-8"))
        except UnicodeDecodeError:
            raise InvalidUtf8("invalid UTF-8", line=lineno, path=path) from None
    return TextCorpus(tuple(texts))


def _split_bytes(raw: bytes) -> list[bytes]:
    parts = raw.split(b"\n")
    if parts and parts[-1] == b"":
        parts.pop()
    return parts


def write_text_corpus(corpus: TextCorpus | Iterable[str], path) -> None:
    texts = list(corpus)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(t + "\n" for t in texts))


# ---------------------------------------------------------------------------
# datasets

def concat_datasets(a: Dataset, b: Dataset, name=None) -> Dataset:
    """Append the rows of ``b`` after those of ``a``."""
    if a.n_labels != b.n_labels:
        raise LabelSpaceMismatch(f"{a.n_labels} labels vs {b.n_labels} labels")
    if a.label_features != b.label_features:
        raise LabelSpaceMismatch("label feature corpora differ")
    y = SparseLabelMatrix(sp.vstack([a.y.csr, b.y.csr], format="csr"), validate=False)
    return Dataset(TextCorpus(a.instances.texts + b.instances.texts),
                   a.label_features, y, name or f"{a.name}+{b.name}")


def load_dataset(y_path, instances_path, label_features_path, name=None) -> Dataset:
    y = read_label_matrix(y_path)
    instances = read_text_corpus(instances_path)
    label_features = read_text_corpus(label_features_path)
    if len(instances) != y.n_rows:
        raise DatasetFormatError(
            f"{len(instances)} instance texts but {y.n_rows} label rows", path=instances_path)
    if len(label_features) != y.n_labels:
        raise DatasetFormatError(
            f"{len(label_features)} label texts but {y.n_labels} labels",
            path=label_features_path)
    empty = int(np.sum(np.diff(y.csr.indptr) == 0))
    if empty:
        log.info("%s: %d instances without labels (kept)", y_path, empty)
    return Dataset(instances, label_features, y,
                   name or os.path.splitext(os.path.basename(str(y_path)))[0])


def save_dataset(ds: Dataset, y_path, instances_path) -> None:
    """Write the label matrix and instance texts (label features are shared)."""
    write_label_matrix(ds.y, y_path)
    write_text_corpus(ds.instances, instances_path)
