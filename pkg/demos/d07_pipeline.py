"""
The file-based pipeline
=======================

Write a synthetic dataset and a JSON config to a scratch directory, then
drive every stage through ``labelaug.cli.main``, the same entry point the
``labelaug`` command uses.
"""
import json
import os
import tempfile
from pathlib import Path

from labelaug.cli import main
from labelaug.dataset_io import write_label_matrix, write_text_corpus
from labelaug.synthetic import SyntheticSpec, make_synthetic

d = Path(tempfile.mkdtemp())
trn, tst = make_synthetic(0, SyntheticSpec(n_instances=600, n_labels=120, n_clusters=24))
write_label_matrix(trn.y, d / "trn_X_Y.txt")
write_text_corpus(trn.instances, d / "trn.raw.txt")
write_text_corpus(trn.label_features, d / "lbl.raw.txt")
write_label_matrix(tst.y, d / "tst_X_Y.txt")
write_text_corpus(tst.instances, d / "tst.raw.txt")

# paths are relative to the config file
cfg = {"paths": {"test_y": "tst_X_Y.txt", "test_texts": "tst.raw.txt"},
       "augment": {"delta": 0.1}, "train": {"epochs": 30}, "training_set": "combined"}
(d / "config.json").write_text(json.dumps(cfg, indent=2))
conf = str(d / "config.json")

main(["validate", "--config", conf])
main(["run-all", "--config", conf, "--workers", "2"])
print(sorted(os.listdir(d / "out")))
print(json.loads((d / "out" / "augment_manifest.json").read_text()))

main(["neighbors", "--config", conf, trn.label_features[0], "-k", "5"])

# flags and --set override the file
main(["eval", "--config", conf, "--set", "ks=[1,2]", "--json"])

# errors go to stderr with exit code 1
(d / "bad.txt").write_text("3 x\n")
print(main(["validate", "--config", conf, "--set", "paths.train_y=bad.txt"]))
