"""Training loop, loss dispatch and split evaluation for the three models."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import OBJECTIVE, SUBJECTIVE, DatasetMeta, StudentSequence, pad_batch
from .errors import (
    CheckpointError,
    ConfigError,
    DivergenceError,
    NonFiniteError,
    UndefinedMetricError,
)
from .graph import DenseGraph, build_dense_graph
from .metrics import MetricsReport, auc, classification_metrics, regression_metrics
from .models.dkt import DktConfig, DktModel
from .models.dkvmn import DkvmnConfig, DkvmnModel
from .models.gkt import GktConfig, GktModel
from .optim import Adam

MODEL_KINDS = ("dkt", "dkvmn", "gkt")
MAX_BINS = 11


@dataclass
class TrainConfig:
    model_kind: str = "dkt"
    task: str = OBJECTIVE
    epochs: int = 20
    batch_size: int = 32
    max_seq_len: int = 50
    test_fraction: float = 0.2
    seed: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    hidden: int = 64
    cell: str = "lstm"
    slots: int = 10
    key_dim: int = 32
    value_dim: int = 32
    summary_dim: int = 0
    embed_dim: int = 32
    bins: int = 0  # 0 -> derive from meta.score_levels, capped at MAX_BINS

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"model_kind must be one of {MODEL_KINDS}, got '{self.model_kind}'")
        if self.task not in (OBJECTIVE, SUBJECTIVE):
            raise ConfigError(f"unknown task '{self.task}'")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_seq_len < 2:
            raise ConfigError(f"max_seq_len must be >= 2, got {self.max_seq_len}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.hidden < 1:
            raise ConfigError(f"hidden size must be >= 1, got {self.hidden}")


def resolve_bins(config: TrainConfig, meta: DatasetMeta) -> int:
    """Score levels used by the DKVMN subjective interaction table."""
    if config.bins > 0:
        return config.bins
    if meta.score_levels:
        return min(MAX_BINS, max(max(meta.score_levels.values()), 2))
    return 5


def build_model(
    config: TrainConfig,
    meta: DatasetMeta,
    rng: np.random.Generator,
    graph: Optional[DenseGraph] = None,
):
    if config.model_kind == "dkt":
        return DktModel(
            DktConfig(
                n_skills=meta.n_skills, hidden=config.hidden,
                cell=config.cell, task=config.task,
            ),
            rng,
        )
    if config.model_kind == "dkvmn":
        return DkvmnModel(
            DkvmnConfig(
                n_skills=meta.n_skills, slots=config.slots,
                key_dim=config.key_dim, value_dim=config.value_dim,
                summary_dim=config.summary_dim, bins=resolve_bins(config, meta),
                task=config.task,
            ),
            rng,
        )
    if graph is None:
        raise ConfigError("gkt model needs a dense transition graph")
    return GktModel(
        GktConfig(
            n_skills=meta.n_skills, hidden=config.hidden,
            embed_dim=config.embed_dim, task=config.task,
        ),
        graph,
        rng,
    )


def iter_batches(sequences: list[StudentSequence], batch_size: int, order=None):
    idx = np.arange(len(sequences)) if order is None else order
    for start in range(0, len(idx), batch_size):
        yield [sequences[i] for i in idx[start : start + batch_size]]


def evaluate(
    model,
    sequences: list[StudentSequence],
    meta: DatasetMeta,
    batch_size: int,
    epoch: int = 0,
    split: str = "test",
) -> MetricsReport:
    """Run the model over ``sequences`` and bundle the task's metric suite."""
    preds, targets, skills = [], [], []
    for seqs in iter_batches(sequences, batch_size):
        p, t, k = model.predict(pad_batch(seqs))
        preds.append(p)
        targets.append(t)
        skills.append(k)
    preds = np.concatenate(preds)
    targets = np.concatenate(targets)
    skills = np.concatenate(skills)

    if model.task == OBJECTIVE:
        bce, rmse, mae, acc = classification_metrics(preds, targets)
        try:
            auc_value: Optional[float] = auc(preds, targets.astype(np.int64))
        except UndefinedMetricError:
            auc_value = None
        loss = bce
    else:
        levels = _level_counts(skills, meta)
        mse, rmse, mae, acc = regression_metrics(preds, targets, levels)
        loss = mse
        auc_value = None
    return MetricsReport(
        epoch=epoch, split=split, task=model.task,
        loss=loss, rmse=rmse, mae=mae, acc=acc, auc=auc_value, count=int(preds.size),
    )


def _level_counts(skills: np.ndarray, meta: DatasetMeta) -> np.ndarray:
    table = meta.score_levels or {}
    return np.array([table.get(int(k), MAX_BINS) for k in skills], dtype=np.int64)


@dataclass
class TrainResult:
    model: object
    reports: list[MetricsReport] = field(default_factory=list)
    graph: Optional[DenseGraph] = None


def train(
    train_sequences: list[StudentSequence],
    test_sequences: list[StudentSequence],
    meta: DatasetMeta,
    config: TrainConfig,
) -> TrainResult:
    """Seeded training: shuffle, forward, loss, backward, Adam; evaluate per epoch.

    The GKT transition graph is built from the train split only.
    """
    if not train_sequences:
        raise ConfigError("training needs at least one sequence")
    init_seed, shuffle_seed = np.random.SeedSequence(config.seed).spawn(2)
    graph = None
    if config.model_kind == "gkt":
        graph = build_dense_graph(train_sequences, meta.n_skills)
    model = build_model(config, meta, np.random.Generator(np.random.PCG64(init_seed)), graph)
    optimizer = Adam(
        learning_rate=config.learning_rate, beta1=config.beta1,
        beta2=config.beta2, epsilon=config.epsilon,
    )
    shuffle_rng = np.random.Generator(np.random.PCG64(shuffle_seed))
    reports: list[MetricsReport] = []
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(len(train_sequences))
        for step, seqs in enumerate(iter_batches(train_sequences, config.batch_size, order)):
            params = model.params()
            try:
                loss = model.loss(pad_batch(seqs))
                loss.backward()
            except NonFiniteError as exc:
                raise DivergenceError(f"epoch {epoch}, step {step}: {exc}") from exc
            optimizer.step(params)
            optimizer.zero_grad(params)
        reports.append(
            evaluate(model, train_sequences, meta, config.batch_size, epoch, "train")
        )
        if test_sequences:
            reports.append(
                evaluate(model, test_sequences, meta, config.batch_size, epoch, "test")
            )
    return TrainResult(model=model, reports=reports, graph=graph)


def write_reports_jsonl(reports, path, dataset: str, model_kind: str) -> None:
    """One JSON object per line; ``dataset``/``model`` keys tag every row."""
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            row = {"dataset": dataset, "model": model_kind}
            row.update(report.to_dict())
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def config_to_dict(config: TrainConfig) -> dict:
    return asdict(config)


def config_from_dict(payload: dict) -> TrainConfig:
    allowed = set(TrainConfig.__dataclass_fields__)
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown train config keys: {sorted(unknown)}")
    return TrainConfig(**payload)


# -- checkpoint bridge -----------------------------------------------------------


def save_model_checkpoint(path, model, train_config: TrainConfig, dataset: str) -> None:
    """Persist model parameters plus a config echo (and the GKT graph arrays)."""
    tensors: dict = dict(model.params())
    if model.kind == "gkt":
        tensors["graph.counts"] = model.graph.counts.astype(np.float64)
        tensors["graph.weights"] = model.graph.weights
    config_echo = {
        "model": model.config_dict(),
        "train": config_to_dict(train_config),
        "dataset": dataset,
    }
    save_checkpoint(path, model.kind, config_echo, tensors)


def model_from_checkpoint(ckpt: Checkpoint):
    """Rebuild a model from a loaded checkpoint, restoring exact parameters."""
    model_cfg = dict(ckpt.config["model"])
    tensors = dict(ckpt.tensors)
    if ckpt.model_kind == "dkt":
        model = DktModel(DktConfig(**model_cfg))
    elif ckpt.model_kind == "dkvmn":
        model = DkvmnModel(DkvmnConfig(**model_cfg))
    elif ckpt.model_kind == "gkt":
        counts = tensors.pop("graph.counts", None)
        weights = tensors.pop("graph.weights", None)
        if counts is None or weights is None:
            raise CheckpointError("gkt checkpoint is missing its graph arrays")
        graph = DenseGraph(counts=counts.astype(np.int64), weights=weights)
        model = GktModel(GktConfig(**model_cfg), graph)
    else:
        raise CheckpointError(f"unknown model kind '{ckpt.model_kind}'")
    params = model.params()
    missing = set(params) - set(tensors)
    extra = set(tensors) - set(params)
    if missing or extra:
        raise CheckpointError(
            f"checkpoint parameters do not match model: missing={sorted(missing)}, "
            f"unexpected={sorted(extra)}"
        )
    for name, tensor in params.items():
        if tensors[name].shape != tensor.data.shape:
            raise CheckpointError(
                f"parameter '{name}': checkpoint shape {tensors[name].shape} "
                f"!= model shape {tensor.data.shape}"
            )
        tensor.data = tensors[name].copy()
    return model


def load_model_checkpoint(path):
    ckpt = load_checkpoint(path)
    return model_from_checkpoint(ckpt), ckpt
