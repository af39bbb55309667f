"""Evaluation metrics: rank-based AUC, classification and regression bundles."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .errors import UndefinedMetricError

PROB_EPS = 1e-7


def auc(scores, labels) -> float:
    """Probability that a random positive outranks a random negative, ties at 1/2.

    Computed from average ranks (Mann-Whitney U), which handles ties exactly
    and matches the O(n^2) pairwise count.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise UndefinedMetricError(f"auc needs aligned 1-d inputs, got {s.shape} vs {y.shape}")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos + n_neg != s.size:
        raise UndefinedMetricError("auc labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("auc undefined: needs both a positive and a negative")
    order = np.argsort(s, kind="mergesort")
    _, start, counts = np.unique(s[order], return_index=True, return_counts=True)
    avg_rank = start + (counts + 1) / 2.0  # 1-based average rank per tie group
    ranks = np.empty(s.size)
    ranks[order] = np.repeat(avg_rank, counts)
    u_stat = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_stat / (n_pos * n_neg))


def classification_metrics(
    probs, labels, threshold: float = 0.5
) -> tuple[float, float, float, float]:
    """(bce, rmse, mae, acc) of probabilities against 0/1 labels."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.size == 0:
        raise UndefinedMetricError("classification_metrics: empty input")
    clamped = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    bce = float(-(y * np.log(clamped) + (1.0 - y) * np.log(1.0 - clamped)).mean())
    rmse = float(np.sqrt(((p - y) ** 2).mean()))
    mae = float(np.abs(p - y).mean())
    acc = float(((p >= threshold) == (y == 1.0)).mean())
    return bce, rmse, mae, acc


def round_to_level(values, levels: Union[int, np.ndarray]) -> np.ndarray:
    """Nearest level index on the uniform [0, 1] grid with ``levels`` points.

    ``levels`` may be one count for all values or a per-value array; counts
    below 2 collapse everything to level 0.
    """
    x = np.asarray(values, dtype=np.float64)
    n_levels = np.broadcast_to(np.asarray(levels, dtype=np.int64), x.shape)
    steps = np.maximum(n_levels - 1, 1)
    idx = np.floor(x * steps + 0.5).astype(np.int64)
    return np.where(n_levels < 2, 0, idx)


def regression_metrics(
    preds, targets, levels: Union[int, np.ndarray] = 2
) -> tuple[float, float, float, float]:
    """(mse, rmse, mae, acc) for normalized scores.

    Accuracy counts a prediction as correct when it rounds to the same score
    level as its target; ``levels`` comes from the dataset's per-skill count
    of distinct raw scores.
    """
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.size == 0:
        raise UndefinedMetricError("regression_metrics: empty input")
    mse = float(((p - t) ** 2).mean())
    rmse = float(np.sqrt(mse))
    mae = float(np.abs(p - t).mean())
    acc = float((round_to_level(p, levels) == round_to_level(t, levels)).mean())
    return mse, rmse, mae, acc


@dataclass
class MetricsReport:
    """One evaluation row: per-epoch loss and metric bundle for one split."""

    epoch: int
    split: str
    task: str
    loss: float
    rmse: float
    mae: float
    acc: float
    auc: Optional[float]
    count: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "MetricsReport":
        return cls(**{k: payload[k] for k in cls.__dataclass_fields__})
