"""Dynamic key-value memory network.

A static key memory addresses slots by softmax attention over inner
products with the question embedding; a per-student value memory is read
through those weights for prediction and updated after each answer with an
erase-then-add write.  The subjective variant quantizes scores into an
enlarged interaction table and reads the sigmoid head as a normalized score,
trained with squared error.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..data import OBJECTIVE, SUBJECTIVE, PaddedBatch
from ..encodings import dkvmn_index_batch
from ..errors import ConfigError
from .common import PROB_EPS


@dataclass(frozen=True)
class DkvmnConfig:
    n_skills: int
    slots: int = 10
    key_dim: int = 32
    value_dim: int = 32
    summary_dim: int = 0  # 0 -> key_dim
    bins: int = 5  # subjective score levels in the interaction table
    task: str = OBJECTIVE

    def __post_init__(self):
        if min(self.n_skills, self.slots, self.key_dim, self.value_dim) < 1:
            raise ConfigError("n_skills, slots, key_dim and value_dim must all be >= 1")
        if self.task not in (OBJECTIVE, SUBJECTIVE):
            raise ConfigError(f"unknown task '{self.task}'")
        if self.task == SUBJECTIVE and self.bins < 2:
            raise ConfigError(f"subjective task needs bins >= 2, got {self.bins}")

    @property
    def resolved_summary_dim(self) -> int:
        return self.summary_dim if self.summary_dim > 0 else self.key_dim

    @property
    def interaction_space(self) -> int:
        factor = 2 if self.task == OBJECTIVE else self.bins
        return factor * self.n_skills


def attention_weights(query: Tensor, key_memory: Tensor) -> Tensor:
    """Softmax over slot inner products; rows sum to one.  (B,dk) x (S,dk) -> (B,S)."""
    return ad.softmax(query @ ad.transpose(key_memory), axis=-1)


def read(value_memory: Tensor, weights: Tensor) -> Tensor:
    """Attention-weighted slot sum: (B,S,dv) read with (B,S) -> (B,dv)."""
    batch, slots, dim = value_memory.shape
    return ad.reshape(ad.matmul(ad.reshape(weights, (batch, 1, slots)), value_memory), (batch, dim))


def summarize(read_vec: Tensor, query: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Feature layer over the concatenated read vector and question embedding."""
    return ad.tanh(ad.concat([read_vec, query], axis=1) @ w + b)


def predict_outcome(
    read_vec: Tensor, query: Tensor, summary_w: Tensor, summary_b: Tensor,
    head_w: Tensor, head_b: Tensor,
) -> Tensor:
    """Sigmoid head over the summary features -> (B,) values in (0, 1).

    The same form serves both tasks: a correctness probability for objective
    items, a normalized score for subjective ones.
    """
    summary = summarize(read_vec, query, summary_w, summary_b)
    return ad.reshape(ad.sigmoid(summary @ head_w + head_b), (summary.shape[0],))


def write_combine(value_memory: Tensor, weights: Tensor, erase: Tensor, add: Tensor) -> Tensor:
    """Erase-then-add memory update.

    Slot i keeps ``M(i) * (1 - w(i) * erase)`` and gains ``w(i) * add``; a slot
    with zero weight is untouched, and a fully attended slot with erase all
    ones becomes exactly the add vector.
    """
    batch, slots, dim = value_memory.shape
    w3 = ad.reshape(weights, (batch, slots, 1))
    e3 = ad.reshape(erase, (batch, 1, dim))
    a3 = ad.reshape(add, (batch, 1, dim))
    return value_memory * (1.0 - w3 * e3) + w3 * a3


def write(
    value_memory: Tensor,
    weights: Tensor,
    interaction: Tensor,
    erase_w: Tensor,
    erase_b: Tensor,
    add_w: Tensor,
    add_b: Tensor,
) -> Tensor:
    """Full write: gates computed from the interaction embedding, then combine."""
    erase = ad.sigmoid(interaction @ erase_w + erase_b)
    add = ad.tanh(interaction @ add_w + add_b)
    return write_combine(value_memory, weights, erase, add)


def dkvmn_loss(predictions: Tensor, targets: np.ndarray, task: str) -> Tensor:
    """Mean BCE (objective) or mean squared error (subjective) over flat vectors."""
    target = Tensor(np.asarray(targets, dtype=np.float64))
    if task == OBJECTIVE:
        p = ad.clip(predictions, PROB_EPS, 1.0 - PROB_EPS)
        return (-(target * ad.log(p) + (1.0 - target) * ad.log(1.0 - p))).mean()
    return ((predictions - target) ** 2).mean()


class DkvmnModel:
    kind = "dkvmn"

    def __init__(self, config: DkvmnConfig, rng: np.random.Generator | None = None):
        self.config = config
        rng = rng if rng is not None else np.random.Generator(np.random.PCG64(0))
        dk, dv, df = config.key_dim, config.value_dim, config.resolved_summary_dim
        self._params = {
            "key_memory": ad.init_uniform(rng, (config.slots, dk), fan_in=dk),
            "value_init": ad.init_uniform(rng, (config.slots, dv), fan_in=dv),
            "question_embed": ad.init_uniform(rng, (config.n_skills, dk), fan_in=dk),
            "interaction_embed": ad.init_uniform(rng, (config.interaction_space, dv), fan_in=dv),
            "summary_w": ad.init_uniform(rng, (dk + dv, df)),
            "summary_b": ad.init_zeros((df,)),
            "head_w": ad.init_uniform(rng, (df, 1)),
            "head_b": ad.init_zeros((1,)),
            "erase_w": ad.init_uniform(rng, (dv, dv)),
            "erase_b": ad.init_zeros((dv,)),
            "add_w": ad.init_uniform(rng, (dv, dv)),
            "add_b": ad.init_zeros((dv,)),
        }

    def params(self) -> dict[str, Tensor]:
        return self._params

    def config_dict(self) -> dict:
        return asdict(self.config)

    @property
    def task(self) -> str:
        return self.config.task

    def forward(self, batch: PaddedBatch) -> list[Tensor]:
        """One (B,) prediction per step, made before that step's write."""
        p = self._params
        cfg = self.config
        t_len, batch_size = batch.skills.shape
        interaction_idx = dkvmn_index_batch(
            batch.skills, batch.outcomes, batch.mask, cfg.n_skills, cfg.task, cfg.bins
        )
        memory = ad.broadcast_to(p["value_init"], (batch_size, cfg.slots, cfg.value_dim))
        predictions = []
        for t in range(t_len):
            query = ad.rows(p["question_embed"], batch.skills[t])
            weights = attention_weights(query, p["key_memory"])
            read_vec = read(memory, weights)
            predictions.append(
                predict_outcome(
                    read_vec, query,
                    p["summary_w"], p["summary_b"], p["head_w"], p["head_b"],
                )
            )
            interaction = ad.rows(p["interaction_embed"], interaction_idx[t])
            memory = write(
                memory, weights, interaction,
                p["erase_w"], p["erase_b"], p["add_w"], p["add_b"],
            )
        return predictions

    def loss(self, batch: PaddedBatch) -> Tensor:
        """Masked mean loss over every valid step's same-step prediction."""
        predictions = self.forward(batch)
        flat, targets = _flatten_valid(predictions, batch)
        return dkvmn_loss(flat, targets, self.config.task)

    def predict(self, batch: PaddedBatch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with ad.no_grad():
            predictions = self.forward(batch)
        preds, targets, skills = [], [], []
        for t in range(batch.seq_len):
            valid = batch.mask[t]
            if not valid.any():
                continue
            preds.append(predictions[t].data[valid])
            targets.append(batch.outcomes[t][valid])
            skills.append(batch.skills[t][valid])
        return np.concatenate(preds), np.concatenate(targets), np.concatenate(skills)


def _flatten_valid(predictions: list[Tensor], batch: PaddedBatch) -> tuple[Tensor, np.ndarray]:
    picked, targets = [], []
    for t in range(batch.seq_len):
        valid_idx = np.nonzero(batch.mask[t])[0]
        if valid_idx.size == 0:
            continue
        picked.append(ad.rows(predictions[t], valid_idx))
        targets.append(batch.outcomes[t][valid_idx])
    return ad.concat(picked, axis=0), np.concatenate(targets)
