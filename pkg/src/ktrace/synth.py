"""Seeded synthetic learners with known ground truth.

Two-state mastery dynamics per (student, skill): initially mastered with
probability ``p_init``; each exposure of an unmastered skill flips it to
mastered with probability ``p_learn`` after the answer is recorded.
Objective answers are correct with probability ``1 - slip`` when mastered
and ``guess`` otherwise; subjective scores are the 0/1 mastery level plus
Gaussian noise, clamped to [0, 1] and snapped to the uniform score grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import OBJECTIVE, SUBJECTIVE, InteractionRecord
from .errors import ConfigError


@dataclass(frozen=True)
class SynthConfig:
    n_students: int = 500
    n_skills: int = 10
    seq_len: int = 50
    p_init: float = 0.2
    p_learn: float = 0.25
    slip: float = 0.1
    guess: float = 0.1
    task: str = OBJECTIVE
    score_noise_sd: float = 0.1
    score_levels: int = 5

    def __post_init__(self):
        if self.n_students < 1 or self.n_skills < 1 or self.seq_len < 1:
            raise ConfigError("n_students, n_skills and seq_len must all be >= 1")
        for name in ("p_init", "p_learn", "slip", "guess"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be a probability, got {value}")
        if self.task not in (OBJECTIVE, SUBJECTIVE):
            raise ConfigError(f"unknown task '{self.task}'")
        if self.score_noise_sd < 0:
            raise ConfigError(f"score_noise_sd must be >= 0, got {self.score_noise_sd}")
        if self.task == SUBJECTIVE and self.score_levels < 2:
            raise ConfigError(f"score_levels must be >= 2, got {self.score_levels}")


def generate(config: SynthConfig, seed: int) -> tuple[list[InteractionRecord], list[bool]]:
    """Emit records plus the aligned latent mastery flag at answer time."""
    rng = np.random.Generator(np.random.PCG64(seed))
    records: list[InteractionRecord] = []
    mastery_flags: list[bool] = []
    order = 0
    grid = config.score_levels - 1 if config.task == SUBJECTIVE else 1
    for student in range(config.n_students):
        mastered = rng.random(config.n_skills) < config.p_init
        for _ in range(config.seq_len):
            skill = int(rng.integers(config.n_skills))
            is_mastered = bool(mastered[skill])
            if config.task == OBJECTIVE:
                if is_mastered:
                    outcome = float(rng.random() >= config.slip)
                else:
                    outcome = float(rng.random() < config.guess)
            else:
                noisy = float(is_mastered) + rng.normal(0.0, config.score_noise_sd)
                clamped = min(max(noisy, 0.0), 1.0)
                outcome = float(np.floor(clamped * grid + 0.5)) / grid
            records.append(
                InteractionRecord(
                    student_id=f"s{student:05d}",
                    skill_id=f"k{skill:04d}",
                    item_id=None,
                    outcome=outcome,
                    order_key=order,
                )
            )
            mastery_flags.append(is_mastered)
            order += 1
            if not is_mastered and rng.random() < config.p_learn:
                mastered[skill] = True
    return records, mastery_flags


def write_csv(records: list[InteractionRecord], path, task: str, score_levels: int = 5) -> None:
    """Write records in the CSV schema the ingest module consumes.

    Objective records become assist09-style rows; subjective outcomes are
    de-normalized back to integer levels for the scored schema.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if task == OBJECTIVE:
            writer.writerow(["order_id", "user_id", "skill_id", "correct"])
            for r in records:
                writer.writerow([r.order_key, r.student_id, r.skill_id, int(r.outcome)])
        else:
            writer.writerow(["exer_id", "user_id", "knowledge_code", "score"])
            grid = score_levels - 1
            for r in records:
                writer.writerow(
                    [r.order_key, r.student_id, r.skill_id, int(round(r.outcome * grid))]
                )
