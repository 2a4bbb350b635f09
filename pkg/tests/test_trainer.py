import itertools

import mpmath
import numpy as np
import pytest

import oracles
from labelaug import (
    Dataset,
    Featurizer,
    SparseLabelMatrix,
    TextCorpus,
    TrainConfig,
    build_augmented,
    featurize,
    precision_at_k,
    predict,
    train,
)
from labelaug.errors import EmptyDataset
from labelaug.synthetic import make_synthetic
from labelaug.trainer import (
    LinearOvAModel,
    bce_with_logits,
    load_model,
    make_batch,
    save_model,
    topk_rows,
)

FAST = TrainConfig(epochs=30, batch_size=8, learning_rate=1.0, negatives_per_instance=3, hash_dim=2 ** 12)


def _ds(texts, rows, L):
    return Dataset(TextCorpus(tuple(texts)), TextCorpus(tuple(f"l{j}" for j in range(L))),
                   SparseLabelMatrix.from_rows(rows, L))


# ---------------------------------------------------------------------------
# features

def test_featurize_deterministic_and_normalised():
    f = Featurizer(2 ** 12).fit(["the cat sat", "a dog ran", "the dog sat"])
    a = featurize(f, "The cat sat on the mat")
    b = featurize(f, "The cat sat on the mat")
    assert (a != b).nnz == 0
    np.testing.assert_array_equal(a.data, b.data)
    assert np.linalg.norm(a.data) == pytest.approx(1.0, abs=1e-15)
    assert featurize(f, "").nnz == 0
    assert featurize(f, "   ").nnz == 0


def test_lowercase_and_bigrams():
    f = Featurizer(2 ** 16)
    assert (featurize(f, "Mario Party") != featurize(f, "mario party")).nnz == 0
    uni = Featurizer(2 ** 16, ngram_max=1)
    assert featurize(f, "mario party").nnz == 3
    assert featurize(uni, "mario party").nnz == 2


def test_disjoint_tokens_orthogonal():
    rng = np.random.default_rng(3)
    vocab = [f"tok{i}" for i in range(200)]
    words = rng.permutation(vocab)
    texts = [" ".join(words[i * 10:(i + 1) * 10]) for i in range(20)]
    f = Featurizer(2 ** 20).fit(texts)
    x = f.transform(texts)
    # collision audit: every text keeps 10 unigrams + 9 bigrams in distinct buckets
    assert np.all(np.diff(x.indptr) == 19)
    assert np.unique(x.indices).size == x.nnz
    gram = (x @ x.T).toarray()
    np.fill_diagonal(gram, 0.0)
    assert np.all(gram == 0.0)


def test_idf_smooth():
    f = Featurizer(2 ** 16, ngram_max=1).fit(["a b", "a c", "a"])
    a = featurize(Featurizer(2 ** 16, ngram_max=1), "a").indices[0]
    c = featurize(Featurizer(2 ** 16, ngram_max=1), "c").indices[0]
    assert f.idf[a] == pytest.approx(np.log(4 / 4) + 1)
    assert f.idf[c] == pytest.approx(np.log(4 / 2) + 1)


def test_featurizer_arguments():
    with pytest.raises(ValueError):
        Featurizer(1000)
    with pytest.raises(ValueError):
        Featurizer(1024, ngram_max=3)


# ---------------------------------------------------------------------------
# loss and gradients

def test_bce_identity():
    s = np.linspace(-30, 30, 121)
    for y in (0.0, 0.25, 1.0):
        with mpmath.workdps(40):
            ref = [float(-y * mpmath.log(1 / (1 + mpmath.exp(-v))) - (1 - y) * mpmath.log(1 - 1 / (1 + mpmath.exp(-v))))
                   for v in s]
        # |s| = 30 costs ~1e-15 absolute to cancellation in logaddexp(0, s) - y s
        np.testing.assert_allclose(bce_with_logits(s, y), ref, rtol=1e-12, atol=1e-14)
        h = 1e-6
        fd = (bce_with_logits(s + h, y) - bce_with_logits(s - h, y)) / (2 * h)
        np.testing.assert_allclose(fd, 1 / (1 + np.exp(-s)) - y, atol=1e-8)


@pytest.mark.parametrize("soft", [True, False])
def test_gradient_matches_finite_differences(soft):
    rng = np.random.default_rng(99)
    for _ in range(5):
        W, b, x, batch = oracles.gradient_case(rng, soft)
        assert oracles.finite_difference_error(W, b, x, batch, rng) < 1e-4


def test_shortlist_pairs():
    y = SparseLabelMatrix.from_rows([{0: 1.0, 2: 0.5}, {1: 1.0}], 4).csr
    batch = make_batch(y, [1, 0], [[1, 3], [2, 2]])
    # row 1: positive 1, negative 3 (1 is a duplicate); row 0: positives 0, 2
    assert list(zip(batch.pos.tolist(), batch.labels.tolist(), batch.targets.tolist())) == [
        (0, 1, 1.0), (0, 3, 0.0), (1, 0, 1.0), (1, 2, 0.5)]


# ---------------------------------------------------------------------------
# training

def test_memorises_single_instance():
    ds = _ds(["lonely words here"], [[2]], 5)
    m = train(ds, TrainConfig(epochs=200, batch_size=1, negatives_per_instance=2, hash_dim=2 ** 10))
    s = m.scores(m.featurizer.transform(["lonely words here"]))[0]
    assert int(np.argmax(s)) == 2


def test_separable_groups_perfect_precision():
    texts = ["red apple fruit", "red cherry fruit", "blue whale sea", "blue shark sea"] * 3
    rows = [[0], [0], [1], [1]] * 3
    ds = _ds(texts, rows, 2)
    m = train(ds, FAST)
    assert precision_at_k(predict(m, texts, 1), ds.y, 1) == 1.0


def test_training_bit_reproducible():
    trn, _ = make_synthetic(2)
    a = train(trn, FAST)
    b = train(trn, FAST)
    assert a.W.tobytes() == b.W.tobytes() and a.b.tobytes() == b.b.tobytes()
    c = train(trn, TrainConfig(**{**FAST.to_dict(), "seed": 1}))
    assert a.W.tobytes() != c.W.tobytes()


def test_soft_targets_used():
    texts = ["alpha beta"] * 4
    ds_soft = _ds(texts, [{0: 1.0, 1: 0.3}] * 4, 2)
    m = train(ds_soft, TrainConfig(epochs=400, batch_size=4, learning_rate=1.0,
                                   negatives_per_instance=0, hash_dim=2 ** 10))
    s = m.scores(m.featurizer.transform(["alpha beta"]))[0]
    p = 1 / (1 + np.exp(-s))
    assert p[0] > 0.9
    assert p[1] == pytest.approx(0.3, abs=0.02)


def test_empty_dataset():
    with pytest.raises(EmptyDataset):
        train(_ds([], [], 3), FAST)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(negatives_per_instance=-1).validate()
    with pytest.raises(ValueError):
        TrainConfig(loss="hinge").validate()


def test_z_only_model_scores_labels():
    trn, tst = make_synthetic(0)
    z = build_augmented(trn).dataset
    m = train(z, FAST)
    assert np.all(np.any(m.W != 0, axis=0))
    p1 = precision_at_k(predict(m, tst.instances, 1), tst.y, 1)
    assert p1 > 10 * (tst.y.nnz / tst.n_rows / tst.n_labels)


# ---------------------------------------------------------------------------
# prediction

def test_topk_matches_argsort_oracle():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n, L = int(rng.integers(1, 20)), int(rng.integers(1, 40))
        scores = rng.integers(-3, 4, size=(n, L)).astype(float)  # many ties
        for k in {1, min(5, L), L}:
            idx, val = topk_rows(scores, k)
            for i in range(n):
                ref = sorted(range(L), key=lambda j: (-scores[i, j], j))[:k]
                assert idx[i].tolist() == ref
                assert val[i].tolist() == scores[i, ref].tolist()


def test_predict_all_labels_and_batch_invariance():
    trn, tst = make_synthetic(1)
    m = train(trn, FAST)
    texts = list(tst.instances)[:300]
    full = predict(m, texts, top_k=m.n_labels)
    assert np.all(np.sort(full.indices, axis=1) == np.arange(m.n_labels))
    ref = predict(m, texts, 5)
    for bs, workers in itertools.product([1, 7, 1024], [1, 4]):
        p = predict(m, texts, 5, batch_size=bs, workers=workers)
        np.testing.assert_array_equal(p.indices, ref.indices)
        np.testing.assert_array_equal(p.scores, ref.scores)
    dense = m.scores(m.featurizer.transform(texts))
    for i in range(len(texts)):
        assert ref.indices[i].tolist() == sorted(range(m.n_labels), key=lambda j: (-dense[i, j], j))[:5]


def test_predict_rejects_deep_k():
    m = LinearOvAModel(Featurizer(2 ** 4), np.zeros((16, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        predict(m, ["x"], top_k=4)


# ---------------------------------------------------------------------------
# checkpoints

def test_checkpoint_round_trip(tmp_path):
    trn, _ = make_synthetic(3)
    m = train(trn, FAST)
    p = tmp_path / "model.bin"
    save_model(m, p)
    raw = p.read_bytes()
    assert raw[:8] == b"LAUGOVA\0"
    back = load_model(p)
    assert back.W.tobytes() == m.W.tobytes() and back.b.tobytes() == m.b.tobytes()
    assert back.featurizer.idf.tobytes() == m.featurizer.idf.tobytes()
    save_model(back, tmp_path / "again.bin")
    assert (tmp_path / "again.bin").read_bytes() == raw


def test_checkpoint_corruption(tmp_path):
    m = LinearOvAModel(Featurizer(2 ** 4), np.zeros((16, 3)), np.zeros(3))
    p = tmp_path / "m.bin"
    save_model(m, p)
    raw = p.read_bytes()
    for bad in (raw[:10], b"NOTMODEL" + raw[8:], raw[:-8], raw[:8] + b"\x02" + raw[9:]):
        p.write_bytes(bad)
        with pytest.raises(ValueError):
            load_model(p)
