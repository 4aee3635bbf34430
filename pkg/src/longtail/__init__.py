"""Long-tailed, metadata-aware classification toolkit.

Class priors, logit adjustment, pretraining losses, logit ensembling,
location filtering and macro-F1 evaluation over plain logits files.
"""

from .adjust import AdjustConfig, adjust_logits, la_loss, la_loss_grad, post_hoc_predict
from .core import (
    UNLABELED,
    LabelRecord,
    LogitRecord,
    ObservationMeta,
    SpeciesVocab,
    build_vocab,
    validate_logits,
)
from .ensemble import EnsembleGroup, aggregate, group_records
from .locfilter import FilterPolicy, Locations2Species, build_l2s, filter_predict
from .metaenc import MetaVocab, build_meta_vocab, encode_meta
from .metrics import ClassReport, EvalReport, macro_f1, per_class_f1, top_k_accuracy
from .pretrain import (
    EmbeddingBatch,
    PretrainConfig,
    info_nce,
    info_nce_grad,
    pretrain_loss,
    pretrain_loss_grad,
    soft_target_ce,
)
from .priors import ClassPrior, SmoothingConfig, estimate_priors, log_priors
from .synth import SynthConfig, generate, zipf_weights

__version__ = "0.1.0"

__all__ = [
    "adjust_logits",
    "AdjustConfig",
    "aggregate",
    "build_l2s",
    "build_meta_vocab",
    "build_vocab",
    "ClassPrior",
    "ClassReport",
    "EmbeddingBatch",
    "encode_meta",
    "EnsembleGroup",
    "estimate_priors",
    "EvalReport",
    "filter_predict",
    "FilterPolicy",
    "generate",
    "group_records",
    "info_nce",
    "info_nce_grad",
    "la_loss",
    "la_loss_grad",
    "LabelRecord",
    "Locations2Species",
    "log_priors",
    "LogitRecord",
    "macro_f1",
    "MetaVocab",
    "ObservationMeta",
    "per_class_f1",
    "post_hoc_predict",
    "pretrain_loss",
    "pretrain_loss_grad",
    "PretrainConfig",
    "SmoothingConfig",
    "soft_target_ce",
    "SpeciesVocab",
    "SynthConfig",
    "top_k_accuracy",
    "UNLABELED",
    "validate_logits",
    "zipf_weights",
]
