import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labelaug import Dataset, SparseLabelMatrix, TextCorpus, concat_datasets
from labelaug.dataset_io import (
    format_label_matrix,
    format_weight,
    parse_label_matrix,
    quantize,
    read_label_matrix,
    read_text_corpus,
    write_label_matrix,
    write_text_corpus,
)
from labelaug.errors import (
    IndexOutOfRange,
    InvalidUtf8,
    LabelSpaceMismatch,
    MalformedEntry,
    MalformedHeader,
    NonAscendingIndices,
    RowCountMismatch,
    WeightOutOfRange,
)


@st.composite
def label_matrices(draw, max_rows=12, max_labels=15, soft=True):
    n_labels = draw(st.integers(1, max_labels))
    n_rows = draw(st.integers(0, max_rows))
    weight = (st.floats(1e-9, 1.0, exclude_min=False) if soft else st.just(1.0))
    rows = []
    for _ in range(n_rows):
        labels = draw(st.sets(st.integers(0, n_labels - 1), max_size=n_labels))
        rows.append({j: draw(weight) for j in labels})
    return SparseLabelMatrix.from_rows(rows, n_labels)


def _write(tmp_path, text, name="m.txt", mode="w"):
    p = tmp_path / name
    if mode == "wb":
        p.write_bytes(text)
    else:
        p.write_text(text, encoding="ascii", newline="")
    return p


# ---------------------------------------------------------------------------
# reading

def test_minimal_file_with_empty_row(tmp_path):
    m = read_label_matrix(_write(tmp_path, "2 3\n0:1 2:1\n\n"))
    assert m.shape == (2, 3)
    assert m.to_rows() == [{0: 1.0, 2: 1.0}, {}]


def test_benchmark_header(tmp_path):
    m = read_label_matrix(_write(tmp_path, "294805 131073\n" + "\n" * 294805))
    assert (m.n_rows, m.n_labels) == (294805, 131073)
    assert m.nnz == 0


def test_soft_weight_parse(tmp_path):
    m = read_label_matrix(_write(tmp_path, "1 2\n1:0.333333\n"))
    assert m.to_rows() == [{1: 0.333333}]
    assert not m.is_hard()


def test_missing_trailing_newline_tolerated():
    assert parse_label_matrix("1 2\n0:1").to_rows() == [{0: 1.0}]


@pytest.mark.parametrize("text", ["", "3\n", "a b\n", "2 3 4\n", "-1 3\n"])
def test_malformed_header(text):
    with pytest.raises(MalformedHeader) as e:
        parse_label_matrix(text)
    assert e.value.line == 1


@pytest.mark.parametrize("text, exc, line", [
    ("2 3\n0:1\n3:1\n", IndexOutOfRange, 3),
    ("1 3\n2:1 1:1\n", NonAscendingIndices, 2),
    ("1 3\n1:1 1:1\n", NonAscendingIndices, 2),
    ("2 3\n\n0:0\n", WeightOutOfRange, 3),
    ("1 3\n0:1.5\n", WeightOutOfRange, 2),
    ("1 3\n0:-0.5\n", WeightOutOfRange, 2),
    ("1 3\n0:x\n", MalformedEntry, 2),
    ("1 3\n0\n", MalformedEntry, 2),
    ("1 3\n-1:1\n", MalformedEntry, 2),
])
def test_entry_errors_carry_line(text, exc, line):
    with pytest.raises(exc) as e:
        parse_label_matrix(text)
    assert e.value.line == line


def test_index_out_of_range_details(tmp_path):
    p = _write(tmp_path, "1 4\n0:1 9:1\n")
    with pytest.raises(IndexOutOfRange) as e:
        read_label_matrix(p)
    assert (e.value.line, e.value.index) == (2, 9)
    assert str(p) in str(e.value)


def test_row_count_mismatch():
    with pytest.raises(RowCountMismatch):
        parse_label_matrix("3 2\n0:1\n")


@settings(max_examples=60, deadline=None)
@given(label_matrices(soft=False, max_rows=20), st.data())
def test_fuzz_out_of_range_index_reports_its_line(m, data):
    if m.n_rows == 0:
        return
    lines = format_label_matrix(m).split("\n")
    r = data.draw(st.integers(0, m.n_rows - 1))
    bad = m.n_labels + data.draw(st.integers(0, 5))
    # append keeps indices ascending, so only the range check can fire
    lines[r + 1] = (lines[r + 1] + f" {bad}:1").strip()
    with pytest.raises(IndexOutOfRange) as e:
        parse_label_matrix("\n".join(lines))
    assert e.value.line == r + 2
    assert e.value.index == bad


# ---------------------------------------------------------------------------
# writing

def test_weight_formatting():
    assert format_weight(1.0) == "1"
    assert format_weight(1 / 3) == "0.333333"
    assert format_weight(0.9999996) == "1"
    assert format_weight(1e-9) == "0.000001"


def test_write_lines(tmp_path):
    m = SparseLabelMatrix.from_rows([{1: 1 / 3}, {0: 1.0, 2: 1.0}, {}], 3)
    p = tmp_path / "m.txt"
    write_label_matrix(m, p)
    assert p.read_text() == "3 3\n1:0.333333\n0:1 2:1\n\n"


@settings(max_examples=150, deadline=None)
@given(label_matrices())
def test_round_trip_quantizes_then_is_byte_stable(m):
    text = format_label_matrix(m)
    back = parse_label_matrix(text)
    assert back == quantize(m)
    assert format_label_matrix(back) == text


def test_round_trip_files_byte_identical(tmp_path, rng):
    rows = [{int(j): float(rng.random()) or 1.0 for j in np.flatnonzero(rng.random(40) < 0.2)}
            for _ in range(50)]
    m = SparseLabelMatrix.from_rows(rows, 40)
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_label_matrix(m, a)
    write_label_matrix(read_label_matrix(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_matrix_invariants_enforced():
    with pytest.raises(ValueError):
        SparseLabelMatrix.from_rows([{0: 1.5}], 2)
    with pytest.raises(ValueError):
        SparseLabelMatrix.from_rows([[3]], 2)


# ---------------------------------------------------------------------------
# text corpora

def test_corpus_lines(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("Mario Party 7\nSuper Mario Sunshine\n", encoding="utf-8")
    assert read_text_corpus(p).texts == ("Mario Party 7", "Super Mario Sunshine")


def test_empty_corpus(tmp_path):
    p = tmp_path / "t.txt"
    p.write_bytes(b"")
    assert len(read_text_corpus(p)) == 0


def test_whitespace_lines_kept(tmp_path):
    p = tmp_path / "t.txt"
    p.write_bytes("a\n   \n\nété \n".encode())
    assert read_text_corpus(p).texts == ("a", "   ", "", "été ")


def test_invalid_utf8_line(tmp_path):
    p = _write(tmp_path, b"ok\nstill ok\nbad \xff\n", mode="wb")
    with pytest.raises(InvalidUtf8) as e:
        read_text_corpus(p)
    assert e.value.line == 3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.text(alphabet=st.characters(blacklist_characters="\n\r",
                                                blacklist_categories=("Cs",)), max_size=12),
                max_size=8))
def test_corpus_round_trip(tmp_path_factory, texts):
    p = tmp_path_factory.mktemp("c") / "t.txt"
    write_text_corpus(texts, p)
    assert read_text_corpus(p).texts == tuple(texts)


def test_corpus_rejects_newlines():
    with pytest.raises(ValueError):
        TextCorpus(("a\nb",))


# ---------------------------------------------------------------------------
# datasets

def _ds(rows, n_labels, prefix="x"):
    lf = TextCorpus(tuple(f"label {j}" for j in range(n_labels)))
    return Dataset(TextCorpus(tuple(f"{prefix}{i}" for i in range(len(rows)))), lf,
                   SparseLabelMatrix.from_rows(rows, n_labels))


def test_dataset_size_invariants():
    lf = TextCorpus(("a", "b"))
    with pytest.raises(ValueError):
        Dataset(TextCorpus(("x",)), lf, SparseLabelMatrix.from_rows([[0], [1]], 2))
    with pytest.raises(ValueError):
        Dataset(TextCorpus(("x",)), TextCorpus(("a",)), SparseLabelMatrix.from_rows([[0]], 2))


def test_concat_sizes_and_order():
    d = _ds([[0], [1, 2], []], 3, "d")
    z = _ds([{0: 1.0}, {0: 0.5, 1: 1.0}, {2: 1.0}], 3, "z")
    g = concat_datasets(d, z)
    assert g.n_rows == d.n_rows + z.n_rows
    for j in range(z.n_rows):
        assert g.y.row_dict(d.n_rows + j) == z.y.row_dict(j)
        assert g.instances[d.n_rows + j] == z.instances[j]
    assert g.y.to_rows()[:3] == d.y.to_rows()


def test_concat_identity():
    d = _ds([[0], [1, 2]], 3)
    e = _ds([], 3)
    g = concat_datasets(d, e)
    assert g.y == d.y and g.instances == d.instances


def test_concat_label_space_mismatch():
    with pytest.raises(LabelSpaceMismatch):
        concat_datasets(_ds([[0]], 2), _ds([[0]], 3))
    a = _ds([[0]], 2)
    b = Dataset(TextCorpus(("x",)), TextCorpus(("other", "texts")), a.y)
    with pytest.raises(LabelSpaceMismatch):
        concat_datasets(a, b)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.sets(st.integers(0, 4)), max_size=5), min_size=3, max_size=3))
def test_concat_associative(parts):
    a, b, c = (_ds([sorted(r) for r in p], 5, f"p{k}") for k, p in enumerate(parts))
    left = concat_datasets(concat_datasets(a, b), c)
    right = concat_datasets(a, concat_datasets(b, c))
    assert left.y == right.y and left.instances == right.instances
