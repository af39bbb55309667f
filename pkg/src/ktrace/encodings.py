"""Per-step input encodings for the three models, objective and subjective.

Objective interactions use the classic doubled one-hot space: skill ``e``
answered with outcome ``r`` maps to position ``e + r*N`` (wrong answers in
the first block, right answers in the second).  Subjective interactions
carry a normalized score ``a`` in [0, 1]:

* DKT writes the attempt marker and the raw score into a dense 2N vector;
* DKVMN quantizes ``a`` to one of ``bins`` levels and indexes an enlarged
  ``bins*N`` interaction table;
* GKT interpolates between the "wrong" and "right" embedding rows so the
  binary limits recover the objective encoding exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import OBJECTIVE, SUBJECTIVE
from .errors import ConfigError, DataError

KIND_DKT_DENSE = "dkt_dense"
KIND_INDEX = "index"
KIND_GKT_PAIR = "gkt_pair"


@dataclass(frozen=True)
class EncodedStep:
    """One encoded interaction; exactly one payload matches ``kind``."""

    kind: str
    dense: Optional[np.ndarray] = None
    index: Optional[int] = None
    pair: Optional[tuple[int, float]] = None

    def __post_init__(self):
        populated = sum(x is not None for x in (self.dense, self.index, self.pair))
        expected = {KIND_DKT_DENSE: self.dense, KIND_INDEX: self.index, KIND_GKT_PAIR: self.pair}
        if self.kind not in expected:
            raise ConfigError(f"unknown encoding kind '{self.kind}'")
        if populated != 1 or expected[self.kind] is None:
            raise DataError(f"EncodedStep({self.kind}) must populate exactly its own payload")


def _check_skill(skill: int, n_skills: int) -> None:
    if not 0 <= skill < n_skills:
        raise DataError(f"skill index {skill} out of range [0, {n_skills})")


def _check_score(score: float) -> None:
    if not 0.0 <= score <= 1.0:
        raise DataError(f"normalized score {score} outside [0, 1]")


def encode_dkt_objective(skill: int, correct: int, n_skills: int) -> EncodedStep:
    """One-hot pair encoding: position ``skill + correct*N`` set to one."""
    _check_skill(skill, n_skills)
    if correct not in (0, 1):
        raise DataError(f"objective outcome must be 0 or 1, got {correct}")
    dense = np.zeros(2 * n_skills)
    dense[skill + correct * n_skills] = 1.0
    return EncodedStep(kind=KIND_DKT_DENSE, dense=dense)


def encode_dkt_subjective(skill: int, score: float, n_skills: int) -> EncodedStep:
    """Attempt marker at ``skill``; the normalized score at ``skill + N``."""
    _check_skill(skill, n_skills)
    _check_score(score)
    dense = np.zeros(2 * n_skills)
    dense[skill] = 1.0
    dense[skill + n_skills] = score
    return EncodedStep(kind=KIND_DKT_DENSE, dense=dense)


def quantize_score(score: float, bins: int) -> int:
    """Map a score in [0, 1] to a level in 0..bins-1 (half-up rounding)."""
    if bins < 2:
        raise ConfigError(f"need at least 2 score bins, got {bins}")
    _check_score(score)
    return int(np.floor(score * (bins - 1) + 0.5))

def encode_dkvmn(
    skill: int, outcome: float, n_skills: int, task: str, bins: int = 0
) -> tuple[int, int]:
    """Return (question_index, interaction_index) for the two DKVMN lookups.

    Objective: interaction index ``skill + r*N``.  Subjective: the score is
    quantized to ``bins`` levels and the index is ``skill + level*N``, living
    in ``[0, bins*N)``.
    """
    _check_skill(skill, n_skills)
    if task == OBJECTIVE:
        if outcome not in (0.0, 1.0):
            raise DataError(f"objective outcome must be 0 or 1, got {outcome}")
        return skill, skill + int(outcome) * n_skills
    if task == SUBJECTIVE:
        level = quantize_score(outcome, bins)
        return skill, skill + level * n_skills
    raise ConfigError(f"unknown task '{task}'")


def decode_dkvmn_index(index: int, n_skills: int) -> tuple[int, int]:
    """Invert the interaction index back to (skill, level)."""
    return index % n_skills, index // n_skills


def encode_gkt(skill: int, outcome: float, n_skills: int, task: str) -> EncodedStep:
    """Objective: row index ``skill + r*N`` of the answer-embedding table.

    Subjective: the (skill, score) pair is kept; the model resolves it as the
    interpolation ``a*row[skill+N] + (1-a)*row[skill]``.
    """
    _check_skill(skill, n_skills)
    if task == OBJECTIVE:
        if outcome not in (0.0, 1.0):
            raise DataError(f"objective outcome must be 0 or 1, got {outcome}")
        return EncodedStep(kind=KIND_INDEX, index=skill + int(outcome) * n_skills)
    if task == SUBJECTIVE:
        _check_score(outcome)
        return EncodedStep(kind=KIND_GKT_PAIR, pair=(skill, outcome))
    raise ConfigError(f"unknown task '{task}'")


def interpolate_rows(table: np.ndarray, skill: int, score: float, n_skills: int) -> np.ndarray:
    """Blend the correct/incorrect rows of a 2N-row table for a graded outcome."""
    return score * table[skill + n_skills] + (1.0 - score) * table[skill]


# -- vectorized batch forms (cross-checked against the scalar encoders in tests) --


def _check_batch(skills: np.ndarray, outcomes: np.ndarray, mask: np.ndarray,
                 n_skills: int, task: str) -> None:
    valid_skills = skills[mask]
    valid_outcomes = outcomes[mask]
    if valid_skills.size and (valid_skills.min() < 0 or valid_skills.max() >= n_skills):
        raise DataError(f"skill index out of range [0, {n_skills}) in batch")
    if task == OBJECTIVE:
        if not np.all(np.isin(valid_outcomes, (0.0, 1.0))):
            raise DataError("objective batch contains outcomes other than 0/1")
    elif valid_outcomes.size and (valid_outcomes.min() < 0 or valid_outcomes.max() > 1):
        raise DataError("subjective batch contains scores outside [0, 1]")


def dkt_input_batch(
    skills: np.ndarray, outcomes: np.ndarray, mask: np.ndarray, n_skills: int, task: str
) -> np.ndarray:
    """Dense (T, B, 2N) input batch; padded steps stay all-zero."""
    _check_batch(skills, outcomes, mask, n_skills, task)
    t_len, batch = skills.shape
    dense = np.zeros((t_len, batch, 2 * n_skills))
    tt, bb = np.nonzero(mask)
    ee = skills[tt, bb]
    aa = outcomes[tt, bb]
    if task == OBJECTIVE:
        dense[tt, bb, ee + aa.astype(np.int64) * n_skills] = 1.0
    else:
        dense[tt, bb, ee] = 1.0
        dense[tt, bb, ee + n_skills] = aa
    return dense


def dkvmn_index_batch(
    skills: np.ndarray, outcomes: np.ndarray, mask: np.ndarray, n_skills: int, task: str, bins: int
) -> np.ndarray:
    """Interaction indices (T, B); padded steps index 0."""
    _check_batch(skills, outcomes, mask, n_skills, task)
    if task == OBJECTIVE:
        levels = outcomes.astype(np.int64)
    else:
        levels = np.floor(outcomes * (bins - 1) + 0.5).astype(np.int64)
    return np.where(mask, skills + levels * n_skills, 0)
