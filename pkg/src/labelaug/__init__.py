"""Label-feature data augmentation for short-text extreme multi-label classification."""
from .augmentor import (
    AugmentConfig,
    build_augmented,
    combine,
    gandalf_targets,
    glas_targets,
    select_labels,
    self_annotation_targets,
    uniform_subsample,
)
from .dataset_io import (
    Dataset,
    SparseLabelMatrix,
    TextCorpus,
    concat_datasets,
    load_dataset,
    read_label_matrix,
    read_text_corpus,
    write_label_matrix,
    write_text_corpus,
)
from .label_graph import (
    CooccurrenceGraph,
    build_cooccurrence,
    build_walk_graph,
    conditional,
    symmetrized_similarity,
    top_neighbors,
)
from .metrics import (
    EvalReport,
    Predictions,
    bin_contributions,
    build_propensities,
    coverage_at_k,
    evaluate,
    precision_at_k,
    psp_at_k,
)
from .trainer import Featurizer, LinearOvAModel, TrainConfig, featurize, predict, train

__version__ = "0.1.0"
