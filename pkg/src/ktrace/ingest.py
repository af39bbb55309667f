"""CSV ingestion: parsing, cleaning, id remapping, score normalization, splitting.

Two source schemas are supported:

* ``assist09`` -- objective items: ``order_id, user_id, skill_id, correct``
* ``scored``   -- subjective items: ``exer_id, user_id, knowledge_code, score``

In both, the first column is a non-time-series-aligned record id whose
numeric order gives the within-student ordering.  Extra columns are ignored.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .data import OBJECTIVE, SUBJECTIVE, DatasetMeta, InteractionRecord, StudentSequence
from .errors import ConfigError, DegenerateSkillError, RowError, SchemaError

SCHEMAS = {
    "assist09": {
        "order": "order_id",
        "student": "user_id",
        "skill": "skill_id",
        "outcome": "correct",
        "task": OBJECTIVE,
    },
    "scored": {
        "order": "exer_id",
        "student": "user_id",
        "skill": "knowledge_code",
        "outcome": "score",
        "task": SUBJECTIVE,
    },
}

RawRow = dict


def schema_columns(schema: str) -> list[str]:
    if schema not in SCHEMAS:
        raise ConfigError(f"unknown schema '{schema}' (expected one of {sorted(SCHEMAS)})")
    cols = SCHEMAS[schema]
    return [cols["order"], cols["student"], cols["skill"], cols["outcome"]]


def parse_csv(source, schema: str) -> list[RawRow]:
    """Parse ``source`` (path, text or binary stream) into raw row dicts."""
    required = schema_columns(schema)
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    elif hasattr(source, "read"):
        blob = source.read()
        text = blob.decode("utf-8") if isinstance(blob, bytes) else blob
    else:
        raise ConfigError(f"unsupported CSV source type {type(source)!r}")

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty CSV: no header row") from None
    header = [h.strip() for h in header]
    for col in required:
        if col not in header:
            raise SchemaError(f"missing required column '{col}' for schema '{schema}'")

    rows: list[RawRow] = []
    for line_no, values in enumerate(reader, start=2):
        if not values:
            continue
        if len(values) != len(header):
            raise RowError(
                f"line {line_no}: expected {len(header)} fields, got {len(values)}"
            )
        rows.append(dict(zip(header, values)))
    return rows


def _is_missing(value: str) -> bool:
    v = value.strip()
    return v == "" or v.lower() in ("nan", "na", "null")


def clean(rows: list[RawRow], schema: str) -> tuple[list[RawRow], dict[str, int]]:
    """Drop NaN-skill rows and exact duplicates; return surviving rows + counts.

    A duplicate is a row equal to an earlier one on every schema column
    (student, skill, outcome and order key).  Cleaning is idempotent.
    """
    cols = SCHEMAS[schema]
    skill_col = cols["skill"]
    key_cols = schema_columns(schema)
    kept: list[RawRow] = []
    seen: set[tuple] = set()
    removed = {"nan": 0, "dup": 0}
    for row in rows:
        if _is_missing(row.get(skill_col, "")):
            removed["nan"] += 1
            continue
        key = tuple(row[c].strip() for c in key_cols)
        if key in seen:
            removed["dup"] += 1
            continue
        seen.add(key)
        kept.append(row)
    return kept, removed


def remap_ids(rows: list[RawRow], schema: str) -> tuple[list[InteractionRecord], DatasetMeta]:
    """Map raw student/skill ids to dense 0-based indices in first-appearance order.

    Objective outcomes are parsed as 0/1; subjective raw scores are kept as-is
    pending :func:`normalize_scores`.
    """
    cols = SCHEMAS[schema]
    task = cols["task"]
    skills: dict[str, int] = {}
    students: dict[str, int] = {}
    records: list[InteractionRecord] = []
    for i, row in enumerate(rows):
        student = row[cols["student"]].strip()
        skill = row[cols["skill"]].strip()
        raw_outcome = row[cols["outcome"]].strip()
        raw_order = row[cols["order"]].strip()
        try:
            order_key = int(float(raw_order))
        except ValueError:
            raise RowError(f"row {i}: order key {raw_order!r} is not numeric") from None
        try:
            outcome = float(raw_outcome)
        except ValueError:
            raise RowError(
                f"row {i} (student {student!r}, skill {skill!r}): "
                f"outcome {raw_outcome!r} is not numeric"
            ) from None
        if task == OBJECTIVE and outcome not in (0.0, 1.0):
            raise RowError(f"row {i}: 'correct' must be 0 or 1, got {raw_outcome!r}")
        if task == SUBJECTIVE and outcome < 0:
            raise RowError(f"row {i}: negative score {raw_outcome!r}")
        if student not in students:
            students[student] = len(students)
        if skill not in skills:
            skills[skill] = len(skills)
        records.append(
            InteractionRecord(
                student_id=student,
                skill_id=skill,
                item_id=None,
                outcome=outcome,
                order_key=order_key,
            )
        )
    meta = DatasetMeta(
        n_skills=len(skills),
        n_students=len(students),
        task=task,
        skill_ids=list(skills),
        student_ids=list(students),
    )
    return records, meta


def normalize_scores(
    records: list[InteractionRecord],
    meta: DatasetMeta,
    max_score_table: Optional[dict[str, float]] = None,
) -> tuple[list[InteractionRecord], DatasetMeta]:
    """Divide raw scores by the per-skill maximum so outcomes land in [0, 1].

    The denominator is the max observed raw score per skill unless a rubric
    maximum is supplied in ``max_score_table`` (raw skill id -> full marks).
    ``score_levels`` records the count of distinct raw scores per skill.
    """
    if meta.task != SUBJECTIVE:
        raise ConfigError("normalize_scores applies to the scored schema only")
    max_raw: dict[str, float] = {}
    distinct: dict[str, set] = {}
    for rec in records:
        max_raw[rec.skill_id] = max(max_raw.get(rec.skill_id, 0.0), rec.outcome)
        distinct.setdefault(rec.skill_id, set()).add(rec.outcome)
    if max_score_table:
        for skill, full in max_score_table.items():
            if full <= 0:
                raise ConfigError(f"rubric maximum for skill {skill!r} must be positive")
            max_raw[skill] = float(full)
    degenerate = sorted(s for s, m in max_raw.items() if m <= 0)
    if degenerate:
        raise DegenerateSkillError(
            f"skills with no positive raw score, cannot normalize: {degenerate}"
        )
    normalized = [
        InteractionRecord(
            student_id=r.student_id,
            skill_id=r.skill_id,
            item_id=r.item_id,
            outcome=r.outcome / max_raw[r.skill_id],
            order_key=r.order_key,
        )
        for r in records
    ]
    skill_map = meta.skill_to_index
    levels = {skill_map[s]: len(vals) for s, vals in distinct.items()}
    meta_out = DatasetMeta(
        n_skills=meta.n_skills,
        n_students=meta.n_students,
        task=meta.task,
        skill_ids=meta.skill_ids,
        student_ids=meta.student_ids,
        score_levels=levels,
    )
    return normalized, meta_out


def split(
    sequences: list[StudentSequence], test_fraction: float, seed: int
) -> tuple[list[StudentSequence], list[StudentSequence]]:
    """Seeded student-level split: no student's chunks straddle the two parts."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    students = sorted({s.student_index for s in sequences})
    if len(students) < 2:
        raise ConfigError(f"need at least 2 students to split, got {len(students)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(students))
    n_test = int(round(len(students) * test_fraction))
    n_test = min(max(n_test, 1), len(students) - 1)
    test_students = {students[i] for i in order[:n_test]}
    train = [s for s in sequences if s.student_index not in test_students]
    test = [s for s in sequences if s.student_index in test_students]
    return train, test


# -- canonical on-disk formats --------------------------------------------------


def write_records_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "student": r.student_id,
                        "skill": r.skill_id,
                        "item": r.item_id,
                        "outcome": r.outcome,
                        "order": r.order_key,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_records_jsonl(path) -> list[InteractionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(
                    InteractionRecord(
                        student_id=obj["student"],
                        skill_id=obj["skill"],
                        item_id=obj.get("item"),
                        outcome=float(obj["outcome"]),
                        order_key=int(obj["order"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise RowError(f"{path}:{line_no}: bad record line: {exc}") from exc
    return records


def write_meta(meta: DatasetMeta, path) -> None:
    Path(path).write_text(json.dumps(meta.to_dict(), sort_keys=True, indent=2) + "\n")


def read_meta(path) -> DatasetMeta:
    return DatasetMeta.from_dict(json.loads(Path(path).read_text()))


@dataclass
class PreprocessResult:
    records: list[InteractionRecord]
    meta: DatasetMeta
    report: dict


def preprocess(
    source, schema: str, max_score_table: Optional[dict[str, float]] = None
) -> PreprocessResult:
    """Full pipeline: parse -> clean -> remap -> normalize (scored only)."""
    rows = parse_csv(source, schema)
    kept, removed = clean(rows, schema)
    records, meta = remap_ids(kept, schema)
    if meta.task == SUBJECTIVE:
        records, meta = normalize_scores(records, meta, max_score_table)
    lengths: dict[str, int] = {}
    for r in records:
        lengths[r.student_id] = lengths.get(r.student_id, 0) + 1
    counts = sorted(lengths.values())
    report = {
        "rows_read": len(rows),
        "removed": removed,
        "n_records": len(records),
        "n_students": meta.n_students,
        "n_skills": meta.n_skills,
        "task": meta.task,
        "records_per_student": {
            "min": counts[0] if counts else 0,
            "max": counts[-1] if counts else 0,
            "mean": round(sum(counts) / len(counts), 3) if counts else 0.0,
        },
    }
    return PreprocessResult(records=records, meta=meta, report=report)
