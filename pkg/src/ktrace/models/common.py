"""Shared pieces for the sequence models: next-step selector loss, eval gathering."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..data import OBJECTIVE, PaddedBatch
from ..errors import DataError

PROB_EPS = 1e-7  # clamp for log() inside binary cross-entropy


def next_step_selector_loss(
    step_outputs: list[Tensor],
    skills: np.ndarray,
    outcomes: np.ndarray,
    mask: np.ndarray,
    task: str,
) -> Tensor:
    """Mean loss over valid (t, t+1) pairs, reading only the target coordinate.

    ``step_outputs[t]`` is a (B, N) prediction made after step t; the target
    is step t+1's (skill, outcome).  Objective pairs contribute binary
    cross-entropy, subjective pairs squared error.  Coordinates other than
    the next step's skill never enter the loss.
    """
    t_len, batch = skills.shape
    arange_b = np.arange(batch)
    total = None
    count = 0
    for t in range(t_len - 1):
        valid = mask[t + 1] & mask[t]
        if not valid.any():
            continue
        selected = ad.pick(step_outputs[t], arange_b, skills[t + 1])
        target = Tensor(outcomes[t + 1])
        weight = Tensor(valid.astype(np.float64))
        if task == OBJECTIVE:
            p = ad.clip(selected, PROB_EPS, 1.0 - PROB_EPS)
            term = -(target * ad.log(p) + (1.0 - target) * ad.log(1.0 - p))
        else:
            term = (selected - target) ** 2
        contribution = (term * weight).sum()
        total = contribution if total is None else total + contribution
        count += int(valid.sum())
    if count == 0:
        raise DataError("no valid (t, t+1) prediction pairs in batch")
    return total * (1.0 / count)


def gather_next_step_predictions(
    step_outputs: list[Tensor],
    batch: PaddedBatch,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten valid next-step (prediction, target, target_skill) triples."""
    preds, targets, skills = [], [], []
    arange_b = np.arange(batch.batch_size)
    for t in range(batch.seq_len - 1):
        valid = batch.mask[t + 1] & batch.mask[t]
        if not valid.any():
            continue
        row = step_outputs[t].data[arange_b, batch.skills[t + 1]]
        preds.append(row[valid])
        targets.append(batch.outcomes[t + 1][valid])
        skills.append(batch.skills[t + 1][valid])
    if not preds:
        raise DataError("no valid (t, t+1) prediction pairs in batch")
    return np.concatenate(preds), np.concatenate(targets), np.concatenate(skills)


def mlp_uniform_params(rng, name: str, in_dim: int, hidden: int, out_dim: int) -> dict:
    """Two-layer tanh MLP parameters keyed ``name.w1`` .. ``name.b2``."""
    return {
        f"{name}.w1": ad.init_uniform(rng, (in_dim, hidden)),
        f"{name}.b1": ad.init_zeros((hidden,)),
        f"{name}.w2": ad.init_uniform(rng, (hidden, out_dim)),
        f"{name}.b2": ad.init_zeros((out_dim,)),
    }


def mlp_apply(params: dict, name: str, x: Tensor) -> Tensor:
    hidden = ad.tanh(x @ params[f"{name}.w1"] + params[f"{name}.b1"])
    return hidden @ params[f"{name}.w2"] + params[f"{name}.b2"]
