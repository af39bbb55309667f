"""Knowledge tracing toolkit.

Three sequence models (DKT, DKVMN, GKT) trained as binary classifiers on
objective items or as score regressors on subjective items, plus the data
pipeline, metric suite and a synthetic-learner generator, all on a small
deterministic float64 autodiff engine.
"""

from .autodiff import Tensor, no_grad
from .data import (
    OBJECTIVE,
    SUBJECTIVE,
    DatasetMeta,
    InteractionRecord,
    StudentSequence,
    pad_batch,
    to_sequences,
)
from .gradcheck import grad_check
from .graph import DenseGraph, build_dense_graph
from .metrics import MetricsReport, auc, classification_metrics, regression_metrics
from .models.dkt import DktConfig, DktModel
from .models.dkvmn import DkvmnConfig, DkvmnModel
from .models.gkt import GktConfig, GktModel
from .optim import Adam
from .synth import SynthConfig, generate
from .training import TrainConfig, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "DatasetMeta",
    "DenseGraph",
    "DkvmnConfig",
    "DkvmnModel",
    "DktConfig",
    "DktModel",
    "GktConfig",
    "GktModel",
    "InteractionRecord",
    "MetricsReport",
    "OBJECTIVE",
    "SUBJECTIVE",
    "StudentSequence",
    "SynthConfig",
    "Tensor",
    "TrainConfig",
    "auc",
    "build_dense_graph",
    "classification_metrics",
    "evaluate",
    "generate",
    "grad_check",
    "no_grad",
    "pad_batch",
    "regression_metrics",
    "to_sequences",
    "train",
]
