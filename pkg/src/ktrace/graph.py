"""Statistics-based dense skill-transition graph for GKT."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import StudentSequence
from .errors import ConfigError


@dataclass
class DenseGraph:
    """Row-normalized consecutive-transition frequencies between skills.

    ``counts[i, j]`` is the raw number of i->j transitions (self-transitions
    included); ``weights[i, j]`` is the normalized off-diagonal weight with a
    zero diagonal.  Rows with no outgoing transition stay all-zero.
    """

    counts: np.ndarray
    weights: np.ndarray

    @property
    def n_skills(self) -> int:
        return self.counts.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_skills": self.n_skills,
                "counts": self.counts.astype(int).tolist(),
                "weights": self.weights.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, payload: str) -> "DenseGraph":
        obj = json.loads(payload)
        return cls(
            counts=np.array(obj["counts"], dtype=np.int64),
            weights=np.array(obj["weights"], dtype=np.float64),
        )


def build_dense_graph(
    sequences: list[StudentSequence],
    n_skills: int,
    include_self_in_denominator: bool = False,
) -> DenseGraph:
    """Count consecutive skill transitions over (train) sequences and normalize rows.

    Self-transitions are recorded in ``counts`` but excluded from both the
    numerator and (by default) the denominator of the weight matrix, matching
    its zero diagonal.  ``include_self_in_denominator`` keeps them in the row
    sum for sensitivity runs.
    """
    if n_skills <= 0:
        raise ConfigError(f"n_skills must be positive, got {n_skills}")
    counts = np.zeros((n_skills, n_skills), dtype=np.int64)
    for seq in sequences:
        skills = [k for (k, _), valid in zip(seq.steps, seq.mask) if valid]
        for a, b in zip(skills, skills[1:]):
            counts[a, b] += 1
    numer = counts.astype(np.float64)
    np.fill_diagonal(numer, 0.0)
    if include_self_in_denominator:
        denom = counts.sum(axis=1, keepdims=True).astype(np.float64)
    else:
        denom = numer.sum(axis=1, keepdims=True)
    weights = np.divide(numer, denom, out=np.zeros_like(numer), where=denom > 0)
    return DenseGraph(counts=counts, weights=weights)
