"""Command-line pipeline: validate, graph, augment, train, predict, eval, neighbors, run-all.

Every command reads one JSON config (``--config``); individual fields can
be overridden with ``--set section.field=value`` or the dedicated flags,
and flags win over the file. Data goes to files in the output directory
and to stdout, diagnostics to stderr. The worker count (``--workers`` or
``LABELAUG_WORKERS``) never changes an output byte.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .augmentor import AugmentConfig, build_augmented, combine, uniform_subsample, write_augmented
from .dataset_io import (
    Dataset,
    load_dataset,
    quantize,
    read_label_matrix,
    read_text_corpus,
    write_label_matrix,
    write_text_corpus,
)
from .errors import ConfigError, LabelAugError, UnknownLabel
from .label_graph import build_cooccurrence, dump_graph, top_neighbors
from .metrics import EvalReport, build_propensities, evaluate, read_predictions, write_predictions
from .trainer import TrainConfig, load_model, predict, save_model, train

log = logging.getLogger("labelaug")

WORKERS_ENV = "LABELAUG_WORKERS"
TRAINING_SETS = ("original", "z_only", "combined", "uniform")


@dataclass
class DataPaths:
    train_y: str = "trn_X_Y.txt"
    train_texts: str = "trn.raw.txt"
    label_texts: str = "lbl.raw.txt"
    test_y: str | None = None
    test_texts: str | None = None
    z_y: str | None = None
    z_texts: str | None = None


@dataclass
class PipelineConfig:
    paths: DataPaths = field(default_factory=DataPaths)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    training_set: str = "combined"
    ks: list = field(default_factory=lambda: [1, 3, 5])
    propensity_a: float = 0.55
    propensity_b: float = 1.5
    n_bins: int = 5
    coverage_correct_only: bool = True
    write_combined: bool = False
    write_uniform: bool = False
    output_dir: str = "out"
    base_dir: str = field(default=".", repr=False, compare=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "PipelineConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)} - {"base_dir"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        sub = {"paths": DataPaths, "augment": AugmentConfig, "train": TrainConfig}
        for key, typ in sub.items():
            if key in d:
                known = {f.name for f in fields(typ)}
                bad = set(d[key]) - known
                if bad:
                    raise ConfigError(f"unknown keys in {key!r}: {sorted(bad)}")
                d[key] = typ(**d[key])
        d.pop("base_dir", None)
        return cls(**d, base_dir=base_dir)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def resolve(self, path: str | None) -> str | None:
        if path is None:
            return None
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    @property
    def out(self) -> str:
        return self.resolve(self.output_dir)

    def validate(self) -> "PipelineConfig":
        self.augment.validate()
        self.train.validate()
        if self.training_set not in TRAINING_SETS:
            raise ConfigError(f"training_set must be one of {TRAINING_SETS}")
        return self


def load_config(path: str) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return PipelineConfig.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def apply_override(cfg: PipelineConfig, assignment: str) -> None:
    """Apply ``section.field=value``; the value is parsed as JSON when possible."""
    key, sep, value = assignment.partition("=")
    if not sep:
        raise ConfigError(f"override {assignment!r} is not key=value")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    target = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        if not hasattr(target, part):
            raise ConfigError(f"unknown config section {part!r}")
        target = getattr(target, part)
    if not hasattr(target, parts[-1]):
        raise ConfigError(f"unknown config key {key!r}")
    setattr(target, parts[-1], parsed)


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


# ---------------------------------------------------------------------------
# helpers

def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_text(text: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _train_dataset(cfg: PipelineConfig) -> Dataset:
    p = cfg.paths
    return load_dataset(cfg.resolve(p.train_y), cfg.resolve(p.train_texts), cfg.resolve(p.label_texts),
                        name="train")


def _test_dataset(cfg: PipelineConfig, label_features) -> Dataset:
    p = cfg.paths
    if not p.test_y or not p.test_texts:
        raise ConfigError("paths.test_y and paths.test_texts are required")
    y = read_label_matrix(cfg.resolve(p.test_y))
    texts = read_text_corpus(cfg.resolve(p.test_texts))
    return Dataset(texts, label_features, y, name="test")


def _augmented(cfg: PipelineConfig, ds: Dataset, workers: int):
    """Z as written to disk (weights quantised), plus the build result."""
    result = build_augmented(ds, cfg.augment, workers=workers)
    z = result.dataset
    z = Dataset(z.instances, z.label_features, quantize(z.y), z.name)
    return z, result


def _load_z(cfg: PipelineConfig, ds: Dataset, workers: int) -> Dataset:
    p = cfg.paths
    if p.z_y and p.z_texts:
        return Dataset(read_text_corpus(cfg.resolve(p.z_texts)), ds.label_features,
                       read_label_matrix(cfg.resolve(p.z_y)), name="Z")
    return _augmented(cfg, ds, workers)[0]


def dataset_stats(ds: Dataset) -> dict:
    nnz = ds.y.nnz
    words = [len(t.split()) for t in ds.instances]
    return {
        "N": ds.n_rows,
        "L": ds.n_labels,
        "APpL": nnz / ds.n_labels if ds.n_labels else 0.0,
        "ALpP": nnz / ds.n_rows if ds.n_rows else 0.0,
        "AWpP": float(np.mean(words)) if words else 0.0,
        "empty_rows": int(np.sum(np.diff(ds.y.csr.indptr) == 0)),
        "labels_without_positives": int(np.sum(ds.y.label_frequencies() == 0)),
    }


# ---------------------------------------------------------------------------
# commands

def cmd_validate(cfg: PipelineConfig) -> dict:
    """Parse every configured dataset file and return summary statistics."""
    cfg.validate()
    ds = _train_dataset(cfg)
    report = {"train": dataset_stats(ds)}
    if cfg.paths.test_y and cfg.paths.test_texts:
        report["test"] = dataset_stats(_test_dataset(cfg, ds.label_features))
    return report


def cmd_graph(cfg: PipelineConfig, workers: int = 1) -> dict:
    ds = _train_dataset(cfg)
    g = build_cooccurrence(ds.y, workers=workers)
    os.makedirs(cfg.out, exist_ok=True)
    dump_graph(g, os.path.join(cfg.out, "cooccurrence.txt"))
    info = {"n_labels": g.n_labels, "nnz": int(g.counts.nnz),
            "labels_without_positives": int(np.sum(g.frequencies == 0))}
    _write_json(info, os.path.join(cfg.out, "graph_manifest.json"))
    return info


def cmd_augment(cfg: PipelineConfig, workers: int = 1) -> dict:
    cfg.validate()
    ds = _train_dataset(cfg)
    z, result = _augmented(cfg, ds, workers)
    os.makedirs(cfg.out, exist_ok=True)
    extra = {}
    if cfg.write_combined or cfg.write_uniform:
        g = combine(ds, z)
        extra["combined_rows"] = g.n_rows
        if cfg.write_combined:
            write_label_matrix(g.y, os.path.join(cfg.out, "G_X_Y.txt"))
            write_text_corpus(g.instances, os.path.join(cfg.out, "G.raw.txt"))
        if cfg.write_uniform:
            u = uniform_subsample(g, ds.n_rows, cfg.augment.seed)
            extra["uniform_rows"] = u.n_rows
            write_label_matrix(u.y, os.path.join(cfg.out, "U_X_Y.txt"))
            write_text_corpus(u.instances, os.path.join(cfg.out, "U.raw.txt"))
    return write_augmented(result, cfg.augment, cfg.out, extra=extra)


def training_data(cfg: PipelineConfig, workers: int = 1) -> Dataset:
    ds = _train_dataset(cfg)
    if cfg.training_set == "original":
        return ds
    z = _load_z(cfg, ds, workers)
    if cfg.training_set == "z_only":
        return z
    g = combine(ds, z)
    if cfg.training_set == "combined":
        return g
    return uniform_subsample(g, ds.n_rows, cfg.augment.seed)


def cmd_train(cfg: PipelineConfig, workers: int = 1) -> dict:
    cfg.validate()
    ds = training_data(cfg, workers)
    model = train(ds, cfg.train)
    os.makedirs(cfg.out, exist_ok=True)
    save_model(model, os.path.join(cfg.out, "model.bin"))
    manifest = {"training_set": cfg.training_set, "rows": ds.n_rows, "n_labels": ds.n_labels,
                "train": cfg.train.to_dict(), "augment": cfg.augment.to_dict()}
    _write_json(manifest, os.path.join(cfg.out, "train_manifest.json"))
    return manifest


def cmd_predict(cfg: PipelineConfig, workers: int = 1):
    model = load_model(os.path.join(cfg.out, "model.bin"))
    if not cfg.paths.test_texts:
        raise ConfigError("paths.test_texts is required")
    texts = read_text_corpus(cfg.resolve(cfg.paths.test_texts))
    pred = predict(model, texts, top_k=min(max(cfg.ks), model.n_labels), workers=workers)
    write_predictions(pred, os.path.join(cfg.out, "predictions.txt"))
    return pred


def cmd_eval(cfg: PipelineConfig) -> EvalReport:
    train_ds = _train_dataset(cfg)
    test = _test_dataset(cfg, train_ds.label_features)
    pred = read_predictions(os.path.join(cfg.out, "predictions.txt"))
    prop = build_propensities(train_ds.y, cfg.propensity_a, cfg.propensity_b)
    report = evaluate(pred, test.y, prop, train_ds.y.label_frequencies(), ks=cfg.ks,
                      n_bins=cfg.n_bins, bin_k=max(cfg.ks), correct_only=cfg.coverage_correct_only)
    _write_text(report.to_json(), os.path.join(cfg.out, "report.json"))
    _write_text(report.to_csv(), os.path.join(cfg.out, "report.csv"))
    _write_text(report.bins_csv(), os.path.join(cfg.out, "bins.csv"))
    return report


def cmd_train_eval(cfg: PipelineConfig, workers: int = 1) -> EvalReport:
    cmd_train(cfg, workers)
    cmd_predict(cfg, workers)
    return cmd_eval(cfg)


def resolve_label(label_texts, query) -> int:
    """Exact label text first, then a decimal index."""
    if isinstance(query, (int, np.integer)):
        j = int(query)
    else:
        for j, text in enumerate(label_texts):
            if text == query:
                return j
        if not str(query).isdigit():
            raise UnknownLabel(f"no label with text {query!r}")
        j = int(query)
    if not 0 <= j < len(label_texts):
        raise UnknownLabel(f"label index {j} out of range")
    return j


def cmd_neighbors(cfg: PipelineConfig, query, k: int = 10, workers: int = 1) -> dict:
    """The queried label and its ``k`` strongest co-occurrence neighbours."""
    ds = _train_dataset(cfg)
    j = resolve_label(ds.label_features, query)
    g = build_cooccurrence(ds.y, workers=workers)
    rows = top_neighbors(g, j, k + 1)
    return {
        "label": j,
        "text": ds.label_features[j],
        "frequency": g.frequency(j),
        "neighbors": [{"label": i, "text": ds.label_features[i], "conditional": c} for i, c in rows[1:]],
    }


def cmd_run_all(cfg: PipelineConfig, workers: int = 1) -> EvalReport:
    cmd_validate(cfg)
    cmd_graph(cfg, workers)
    cmd_augment(cfg, workers)
    return cmd_train_eval(cfg, workers)


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline config (JSON)")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, help="seed for augmentation and training")
    common.add_argument("--delta", type=float, help="soft-target threshold")
    common.add_argument("--training-set", choices=TRAINING_SETS)
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default ${WORKERS_ENV} or 1)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config field, e.g. train.epochs=50")
    common.add_argument("--json", action="store_true", help="print JSON to stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="labelaug", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "graph", "augment", "train", "predict", "eval", "run-all"):
        sub.add_parser(name, parents=[common])
    nb = sub.add_parser("neighbors", parents=[common])
    nb.add_argument("label", help="label text (exact) or index")
    nb.add_argument("-k", type=int, default=10)
    return parser


def _configure(args) -> PipelineConfig:
    cfg = load_config(args.config)
    if args.out:
        cfg.output_dir = os.path.abspath(args.out)
    if args.seed is not None:
        cfg.augment.seed = args.seed
        cfg.train.seed = args.seed
    if args.delta is not None:
        cfg.augment.delta = args.delta
    if args.training_set:
        cfg.training_set = args.training_set
    for assignment in args.set:
        apply_override(cfg, assignment)
    return cfg.validate()


def _emit(obj, as_json: bool) -> None:
    if isinstance(obj, EvalReport):
        sys.stdout.write(obj.to_json() if as_json else obj.to_csv())
    elif as_json or not isinstance(obj, dict):
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    else:
        for key, value in obj.items():
            if isinstance(value, dict):
                sys.stdout.write(f"[{key}]\n")
                for k2, v2 in value.items():
                    sys.stdout.write(f"  {k2}: {_fmt(v2)}\n")
            else:
                sys.stdout.write(f"{key}: {_fmt(value)}\n")


def _fmt(v):
    return f"{v:.4f}" if isinstance(v, float) else str(v)


def _emit_neighbors(res: dict, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(json.dumps(res, indent=2, sort_keys=True) + "\n")
        return
    sys.stdout.write(f"{res['label']}\t{res['text']}\t(n={res['frequency']})\n")
    for nb in res["neighbors"]:
        sys.stdout.write(f"  {nb['conditional']:.6f}\t{nb['label']}\t{nb['text']}\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _configure(args)
        workers = args.workers if args.workers is not None else default_workers()
        cmd = args.command
        if cmd == "validate":
            _emit(cmd_validate(cfg), args.json)
        elif cmd == "graph":
            _emit(cmd_graph(cfg, workers), args.json)
        elif cmd == "augment":
            _emit(cmd_augment(cfg, workers), True)
        elif cmd == "train":
            _emit(cmd_train(cfg, workers), True)
        elif cmd == "predict":
            pred = cmd_predict(cfg, workers)
            _emit({"rows": pred.n, "depth": pred.depth}, args.json)
        elif cmd == "eval":
            _emit(cmd_eval(cfg), args.json)
        elif cmd == "neighbors":
            query = args.label
            _emit_neighbors(cmd_neighbors(cfg, query, args.k, workers), args.json)
        elif cmd == "run-all":
            _emit(cmd_run_all(cfg, workers), args.json)
    except (LabelAugError, OSError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"error: {type(exc).__name__}: {msg}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
