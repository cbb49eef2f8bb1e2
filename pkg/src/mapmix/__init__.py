"""Datamaps-guided latent mixup with confidence labels, desk scale.

The package trains a small attention-pooled softmax classifier over
precomputed frame embeddings, logs per-example training dynamics, splits
the data into easy/ambiguous/hard regions, and samples mixup pairs by
region (including the map_mix strategy: easy x ambiguous pairs, hard
region removed, cluster-aware confidence labels).
"""

from .augment import (
    HARD_REMOVAL_STRATEGIES,
    REGION_STRATEGIES,
    STRATEGIES,
    MixPair,
    latent_mix,
    make_pairs,
    retained_set,
    sample_lambda,
    static_mix,
)
from .corpus import (
    DEFAULT_FRAME_RATE_HZ,
    Corpus,
    Taxonomy,
    Utterance,
    default_taxonomy,
    load_corpus,
    load_taxonomy,
    subsample_budget,
    write_corpus,
)
from .dynamics import (
    DatamapConfig,
    DatamapEntry,
    DatamapResult,
    DynamicsLog,
    compute_stats,
    export_datamap,
    load_datamap,
    partition_regions,
)
from .labels import confidence_label, mix_labels, one_hot
from .metrics import (
    EvalReport,
    UtteranceResult,
    aggregate_chunks,
    build_report,
    chunk_offsets,
    cluster_accuracy,
    ece,
    evaluate,
    weighted_f1,
)
from .model import (
    AdamState,
    Gradients,
    ModelParams,
    TrainConfig,
    TrainOutput,
    adam_step,
    attention_pool,
    forward,
    gradients,
    init_params,
    load_checkpoint,
    loss,
    save_checkpoint,
    train,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "Corpus",
    "DatamapConfig",
    "DatamapEntry",
    "DatamapResult",
    "DEFAULT_FRAME_RATE_HZ",
    "DynamicsLog",
    "EvalReport",
    "Gradients",
    "HARD_REMOVAL_STRATEGIES",
    "MixPair",
    "ModelParams",
    "REGION_STRATEGIES",
    "STRATEGIES",
    "SynthConfig",
    "Taxonomy",
    "TrainConfig",
    "TrainOutput",
    "Utterance",
    "UtteranceResult",
    "adam_step",
    "aggregate_chunks",
    "attention_pool",
    "build_report",
    "chunk_offsets",
    "cluster_accuracy",
    "compute_stats",
    "confidence_label",
    "default_taxonomy",
    "ece",
    "evaluate",
    "export_datamap",
    "forward",
    "generate",
    "gradients",
    "init_params",
    "latent_mix",
    "load_checkpoint",
    "load_corpus",
    "load_datamap",
    "load_taxonomy",
    "loss",
    "make_pairs",
    "mix_labels",
    "one_hot",
    "partition_regions",
    "retained_set",
    "sample_lambda",
    "save_checkpoint",
    "static_mix",
    "subsample_budget",
    "train",
    "weighted_f1",
    "write_corpus",
]
