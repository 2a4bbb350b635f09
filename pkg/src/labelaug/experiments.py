"""Desk-scale versions of the augmentation experiments on synthetic data.

Each function trains identical linear models on different training sets
built from one synthetic dataset per seed and evaluates them on that
seed's test split.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import spearmanr

from .augmentor import AugmentConfig, build_augmented, combine, uniform_subsample
from .label_graph import build_cooccurrence
from .metrics import build_propensities, evaluate
from .synthetic import SyntheticSpec, make_synthetic
from .trainer import TrainConfig, predict, train

DESK_TRAIN = TrainConfig(epochs=100, batch_size=32, learning_rate=2.0, negatives_per_instance=10,
                         hash_dim=2 ** 14)
VARIANTS = ("D", "Z", "G", "U", "Z1+D")
FRACTIONS = (0.25, 0.5, 0.75, 1.0)


@dataclass
class SeedResult:
    seed: int
    metrics: dict  # variant -> metric name -> value


def _score(ds, test, prop, freq, cfg):
    model = train(ds, cfg)
    return evaluate(predict(model, test.instances, 5), test.y, prop, freq).metrics


def training_sets(train_ds, seed: int, delta: float = 0.1) -> dict:
    """The five training sets compared per seed, keyed by variant name."""
    graph = build_cooccurrence(train_ds.y)
    z = build_augmented(train_ds, AugmentConfig(delta=delta), graph=graph).dataset
    z1 = build_augmented(train_ds, AugmentConfig(target_kind="self_annotation"), graph=graph).dataset
    g = combine(train_ds, z)
    return {
        "D": train_ds,
        "Z": z,
        "G": g,
        "U": uniform_subsample(g, train_ds.n_rows, seed),
        "Z1+D": combine(train_ds, z1),
    }


def augmentation_effect(seeds=range(10), train_cfg: TrainConfig = DESK_TRAIN,
                        spec: SyntheticSpec | None = None, variants=VARIANTS) -> list[SeedResult]:
    out = []
    for seed in seeds:
        trn, tst = make_synthetic(seed, spec)
        prop = build_propensities(trn.y)
        freq = trn.y.label_frequencies()
        cfg = replace(train_cfg, seed=seed)
        sets = training_sets(trn, seed)
        out.append(SeedResult(seed, {v: _score(sets[v], tst, prop, freq, cfg) for v in variants}))
    return out


def subsampling_sweep(seeds=range(10), fractions=FRACTIONS, schemes=("random", "tail_binned"),
                      train_cfg: TrainConfig = DESK_TRAIN, spec: SyntheticSpec | None = None,
                      metric: str = "PSP@5") -> dict:
    """``metric`` of models trained on D plus a label-subsampled Z.

    Returns ``{scheme: array (n_seeds, n_fractions)}``. A fraction of 1 uses
    every label under both schemes.
    """
    seeds = list(seeds)
    res = {s: np.zeros((len(seeds), len(fractions))) for s in schemes}
    for a, seed in enumerate(seeds):
        trn, tst = make_synthetic(seed, spec)
        prop = build_propensities(trn.y)
        freq = trn.y.label_frequencies()
        graph = build_cooccurrence(trn.y)
        cfg = replace(train_cfg, seed=seed)
        full = None
        for scheme in schemes:
            for b, frac in enumerate(fractions):
                if frac == 1.0 and full is not None:
                    res[scheme][a, b] = full
                    continue
                acfg = AugmentConfig(label_fraction=frac, seed=seed,
                                     sampling_scheme="all" if frac == 1.0 else scheme)
                z = build_augmented(trn, acfg, graph=graph).dataset
                val = _score(combine(trn, z), tst, prop, freq, cfg)[metric]
                if frac == 1.0:
                    full = val
                res[scheme][a, b] = val
    return res


def spearman(values, positions=FRACTIONS) -> float:
    return float(spearmanr(positions, values).statistic)
