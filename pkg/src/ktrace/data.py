"""Canonical in-memory representation of interactions, sequences and metadata."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError

OBJECTIVE = "objective"
SUBJECTIVE = "subjective"


@dataclass(frozen=True)
class InteractionRecord:
    """One student-item event.

    ``outcome`` is 0/1 for objective tasks and a normalized score in [0, 1]
    for subjective tasks (raw scores live here only transiently, between id
    remapping and score normalization).  ``order_key`` totally orders the
    records of one student.
    """

    student_id: str
    skill_id: str
    item_id: Optional[str]
    outcome: float
    order_key: int


@dataclass
class StudentSequence:
    """Time-ordered (skill_index, outcome) steps for one student chunk.

    ``mask[t]`` is False only for padding appended at batch time; sequences
    coming out of :func:`to_sequences` are fully valid.
    """

    student_index: int
    steps: list[tuple[int, float]]
    mask: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.mask:
            self.mask = [True] * len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class DatasetMeta:
    """Dataset-level bookkeeping: sizes, task kind and id maps.

    Id maps are bijections between raw opaque ids and dense 0-based indices
    assigned in first-appearance order.  ``score_levels`` (subjective only)
    counts the distinct raw score values observed per skill index.
    """

    n_skills: int
    n_students: int
    task: str
    skill_ids: list[str]
    student_ids: list[str]
    score_levels: Optional[dict[int, int]] = None

    def __post_init__(self):
        if self.task not in (OBJECTIVE, SUBJECTIVE):
            raise ConfigError(f"unknown task '{self.task}'")
        if len(self.skill_ids) != self.n_skills or len(set(self.skill_ids)) != self.n_skills:
            raise DataError("skill id map is not a bijection onto 0..n_skills-1")
        if len(self.student_ids) != self.n_students or len(set(self.student_ids)) != self.n_students:
            raise DataError("student id map is not a bijection onto 0..n_students-1")

    @property
    def skill_to_index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.skill_ids)}

    @property
    def student_to_index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.student_ids)}

    def to_dict(self) -> dict:
        levels = None
        if self.score_levels is not None:
            levels = {str(k): v for k, v in sorted(self.score_levels.items())}
        return {
            "n_skills": self.n_skills,
            "n_students": self.n_students,
            "task": self.task,
            "score_levels": levels,
            "id_maps": {"skills": self.skill_ids, "students": self.student_ids},
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DatasetMeta":
        levels = payload.get("score_levels")
        if levels is not None:
            levels = {int(k): int(v) for k, v in levels.items()}
        return cls(
            n_skills=payload["n_skills"],
            n_students=payload["n_students"],
            task=payload["task"],
            skill_ids=list(payload["id_maps"]["skills"]),
            student_ids=list(payload["id_maps"]["students"]),
            score_levels=levels,
        )


def meta_from_records(records, task: str) -> DatasetMeta:
    """Build id maps (first-appearance order) and per-skill score-level counts."""
    skills: dict[str, int] = {}
    students: dict[str, int] = {}
    observed: dict[int, set] = {}
    for rec in records:
        if rec.student_id not in students:
            students[rec.student_id] = len(students)
        if rec.skill_id not in skills:
            skills[rec.skill_id] = len(skills)
        if task == SUBJECTIVE:
            observed.setdefault(skills[rec.skill_id], set()).add(rec.outcome)
    levels = None
    if task == SUBJECTIVE:
        levels = {idx: len(vals) for idx, vals in sorted(observed.items())}
    return DatasetMeta(
        n_skills=len(skills),
        n_students=len(students),
        task=task,
        skill_ids=list(skills),
        student_ids=list(students),
        score_levels=levels,
    )


def _chunks(steps: list[tuple[int, float]], max_seq_len: int) -> list[list[tuple[int, float]]]:
    return [steps[i : i + max_seq_len] for i in range(0, len(steps), max_seq_len)]


def to_sequences(records, meta: DatasetMeta, max_seq_len: int) -> list[StudentSequence]:
    """Group records per student, sort by order key and chunk to ``max_seq_len``.

    Over-length histories are split into consecutive chunks so no data is
    discarded; chunks shorter than 2 steps are dropped because they contain
    no next-step prediction target.
    """
    if max_seq_len < 2:
        raise ConfigError(f"max_seq_len must be >= 2, got {max_seq_len}")
    skill_map = meta.skill_to_index
    student_map = meta.student_to_index
    per_student: dict[int, list[tuple[int, int, float]]] = {}
    for rec in records:
        try:
            s_idx = student_map[rec.student_id]
            k_idx = skill_map[rec.skill_id]
        except KeyError as exc:
            raise DataError(f"record references unknown id {exc}") from exc
        if not 0 <= k_idx < meta.n_skills:
            raise DataError(f"skill index {k_idx} out of range [0, {meta.n_skills})")
        per_student.setdefault(s_idx, []).append((rec.order_key, k_idx, rec.outcome))

    sequences: list[StudentSequence] = []
    for s_idx in sorted(per_student):
        entries = sorted(per_student[s_idx], key=lambda e: e[0])
        steps = [(k, outcome) for _, k, outcome in entries]
        for chunk in _chunks(steps, max_seq_len):
            if len(chunk) >= 2:
                sequences.append(StudentSequence(student_index=s_idx, steps=chunk))
    return sequences


@dataclass
class PaddedBatch:
    """Column-major batch of sequences padded to a common length.

    All arrays are (T, B); padded cells carry skill 0 / outcome 0 and a
    False mask entry, and must never contribute to losses or metrics.
    """

    skills: np.ndarray
    outcomes: np.ndarray
    mask: np.ndarray

    @property
    def seq_len(self) -> int:
        return self.skills.shape[0]

    @property
    def batch_size(self) -> int:
        return self.skills.shape[1]


def pad_batch(sequences: list[StudentSequence]) -> PaddedBatch:
    if not sequences:
        raise DataError("cannot pad an empty batch")
    t_len = max(len(s) for s in sequences)
    batch = len(sequences)
    skills = np.zeros((t_len, batch), dtype=np.int64)
    outcomes = np.zeros((t_len, batch), dtype=np.float64)
    mask = np.zeros((t_len, batch), dtype=bool)
    for b, seq in enumerate(sequences):
        for t, ((skill, outcome), valid) in enumerate(zip(seq.steps, seq.mask)):
            skills[t, b] = skill
            outcomes[t, b] = outcome
            mask[t, b] = valid
    return PaddedBatch(skills=skills, outcomes=outcomes, mask=mask)
