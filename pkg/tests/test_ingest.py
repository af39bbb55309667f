import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ktrace.data import StudentSequence
from ktrace.errors import (
    ConfigError,
    DegenerateSkillError,
    RowError,
    SchemaError,
)
from ktrace.ingest import (
    clean,
    normalize_scores,
    parse_csv,
    preprocess,
    read_meta,
    read_records_jsonl,
    remap_ids,
    split,
    write_meta,
    write_records_jsonl,
)

ASSIST_HEADER = "order_id,user_id,skill_id,correct\n"


def assist_csv(rows):
    return (ASSIST_HEADER + "\n".join(rows) + "\n").encode()


def scored_csv(rows):
    return ("exer_id,user_id,knowledge_code,score\n" + "\n".join(rows) + "\n").encode()


class TestParse:
    def test_two_rows(self):
        rows = parse_csv(assist_csv(["1,u1,k1,1", "2,u1,k2,0"]), "assist09")
        assert len(rows) == 2
        assert rows[0]["skill_id"] == "k1"

    def test_missing_column_names_it(self):
        blob = b"order_id,user_id,correct\n1,u1,1\n"
        with pytest.raises(SchemaError, match="skill_id"):
            parse_csv(blob, "assist09")

    def test_ten_row_fixture_preserves_ids(self):
        rows = [f"{i},u{i % 3},k{i % 4},{i % 2}" for i in range(10)]
        parsed = parse_csv(assist_csv(rows), "assist09")
        assert len(parsed) == 10
        assert [r["order_id"] for r in parsed] == [str(i) for i in range(10)]

    def test_ragged_row_reports_line_number(self):
        blob = assist_csv(["1,u1,k1,1", "2,u1,k2"])
        with pytest.raises(RowError, match="line 3"):
            parse_csv(blob, "assist09")

    def test_extra_columns_ignored(self):
        blob = b"order_id,user_id,skill_id,correct,bonus\n1,u1,k1,1,x\n"
        rows = parse_csv(blob, "assist09")
        assert rows[0]["bonus"] == "x"  # kept on the raw row, unused downstream

    def test_stream_and_text_sources(self):
        blob = assist_csv(["1,u1,k1,1"])
        assert len(parse_csv(io.BytesIO(blob), "assist09")) == 1

    def test_unknown_schema(self):
        with pytest.raises(ConfigError):
            parse_csv(assist_csv(["1,u1,k1,1"]), "mystery")


class TestClean:
    def test_empty_skill_dropped(self):
        rows = parse_csv(
            assist_csv(["1,u1,k1,1", "2,u1,,0", "3,u1,k2,1", "4,u1,k1,0", "5,u1,k3,1"]),
            "assist09",
        )
        kept, removed = clean(rows, "assist09")
        assert len(kept) == 4
        assert removed == {"nan": 1, "dup": 0}

    def test_three_identical_rows_reduce_to_one(self):
        rows = parse_csv(assist_csv(["1,u1,k1,1"] * 3), "assist09")
        kept, removed = clean(rows, "assist09")
        assert len(kept) == 1
        assert removed["dup"] == 2

    def test_mixed_fixture_bookkeeping(self):
        rows = parse_csv(
            assist_csv(
                [
                    "1,u1,k1,1",
                    "2,u1,NaN,0",   # nan 1
                    "3,u2,,1",      # nan 2
                    "4,u1,k2,0",
                    "4,u1,k2,0",    # dup 1
                    "5,u2,k1,1",
                    "5,u2,k1,1",    # dup 2
                ]
            ),
            "assist09",
        )
        kept, removed = clean(rows, "assist09")
        assert removed == {"nan": 2, "dup": 2}
        assert len(kept) == 3

    def test_idempotent(self):
        rows = parse_csv(
            assist_csv(["1,u1,k1,1", "1,u1,k1,1", "2,u1,nan,0", "3,u2,k2,1"]), "assist09"
        )
        once, _ = clean(rows, "assist09")
        twice, removed = clean(once, "assist09")
        assert twice == once
        assert removed == {"nan": 0, "dup": 0}


class TestRemap:
    def test_first_appearance_order(self):
        rows = parse_csv(assist_csv(["1,u1,kB,1", "2,u1,kA,0", "3,u1,kB,1"]), "assist09")
        records, meta = remap_ids(rows, "assist09")
        assert meta.skill_ids == ["kB", "kA"]
        assert meta.skill_to_index == {"kB": 0, "kA": 1}

    def test_124_distinct_skills_map_to_contiguous_indices(self):
        rows = parse_csv(
            assist_csv([f"{i},u{i % 7},skill_{i % 124},{i % 2}" for i in range(500)]),
            "assist09",
        )
        records, meta = remap_ids(rows, "assist09")
        assert meta.n_skills == 124
        assert sorted(meta.skill_to_index.values()) == list(range(124))

    def test_round_trip_identity(self):
        rows = parse_csv(assist_csv(["1,u1,kB,1", "2,u2,kA,0"]), "assist09")
        records, meta = remap_ids(rows, "assist09")
        for record in records:
            idx = meta.skill_to_index[record.skill_id]
            assert meta.skill_ids[idx] == record.skill_id

    def test_non_numeric_outcome_rejected_with_context(self):
        rows = parse_csv(assist_csv(["1,u1,k1,yes"]), "assist09")
        with pytest.raises(RowError, match="yes"):
            remap_ids(rows, "assist09")

    def test_non_binary_correct_rejected(self):
        rows = parse_csv(assist_csv(["1,u1,k1,2"]), "assist09")
        with pytest.raises(RowError):
            remap_ids(rows, "assist09")


class TestNormalize:
    def test_divide_by_observed_max(self):
        rows = parse_csv(
            scored_csv(["1,u1,kA,0", "2,u1,kA,2", "3,u1,kA,4"]), "scored"
        )
        records, meta = remap_ids(rows, "scored")
        normalized, meta = normalize_scores(records, meta)
        assert [r.outcome for r in normalized] == [0.0, 0.5, 1.0]
        assert meta.score_levels == {0: 3}

    def test_full_marks_student_is_exactly_one(self):
        rows = parse_csv(scored_csv(["1,u1,kA,7", "2,u2,kA,7"]), "scored")
        records, meta = remap_ids(rows, "scored")
        normalized, _ = normalize_scores(records, meta)
        assert all(r.outcome == 1.0 for r in normalized)

    def test_hand_division_with_two_maxima(self):
        rows = parse_csv(
            scored_csv(["1,u1,kA,3", "2,u1,kA,5", "3,u1,kB,4", "4,u1,kB,10"]), "scored"
        )
        records, meta = remap_ids(rows, "scored")
        normalized, _ = normalize_scores(records, meta)
        assert [r.outcome for r in normalized] == [3 / 5, 1.0, 4 / 10, 1.0]

    def test_rubric_override_changes_denominator(self):
        rows = parse_csv(scored_csv(["1,u1,kA,3"]), "scored")
        records, meta = remap_ids(rows, "scored")
        normalized, _ = normalize_scores(records, meta, max_score_table={"kA": 6})
        assert normalized[0].outcome == 0.5

    def test_all_zero_skill_is_degenerate(self):
        rows = parse_csv(scored_csv(["1,u1,kA,0", "2,u1,kA,0"]), "scored")
        records, meta = remap_ids(rows, "scored")
        with pytest.raises(DegenerateSkillError, match="kA"):
            normalize_scores(records, meta)

    def test_per_skill_max_reaches_one(self):
        rows = parse_csv(
            scored_csv([f"{i},u{i % 4},k{i % 3},{(i % 5) + 1}" for i in range(40)]),
            "scored",
        )
        records, meta = remap_ids(rows, "scored")
        normalized, _ = normalize_scores(records, meta)
        by_skill = {}
        for r in normalized:
            by_skill.setdefault(r.skill_id, []).append(r.outcome)
        for outcomes in by_skill.values():
            assert min(outcomes) >= 0.0
            assert max(outcomes) == 1.0


class TestSplit:
    def make_sequences(self, n_students):
        return [
            StudentSequence(s, [(0, 1.0), (1, 0.0)])
            for s in range(n_students)
            for _ in range(2)  # two chunks each
        ]

    def test_ten_students_80_20(self):
        train, test = split(self.make_sequences(10), 0.2, seed=0)
        assert len({s.student_index for s in train}) == 8
        assert len({s.student_index for s in test}) == 2

    def test_same_seed_same_partition(self):
        seqs = self.make_sequences(20)
        a = split(seqs, 0.3, seed=42)
        b = split(seqs, 0.3, seed=42)
        assert [s.student_index for s in a[0]] == [s.student_index for s in b[0]]
        assert [s.student_index for s in a[1]] == [s.student_index for s in b[1]]

    @given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=5))
    def test_partition_law(self, n_students, seed):
        seqs = self.make_sequences(n_students)
        train, test = split(seqs, 0.25, seed=seed)
        train_students = {s.student_index for s in train}
        test_students = {s.student_index for s in test}
        assert train_students | test_students == set(range(n_students))
        assert train_students & test_students == set()
        assert len(train) + len(test) == len(seqs)

    def test_too_few_students(self):
        with pytest.raises(ConfigError):
            split(self.make_sequences(1), 0.5, seed=0)

    def test_fraction_contract(self):
        with pytest.raises(ConfigError):
            split(self.make_sequences(4), 0.0, seed=0)


class TestPipelineAndFiles:
    def test_preprocess_report(self):
        blob = assist_csv(
            ["1,u1,k1,1", "2,u1,,0", "3,u1,k2,1", "3,u1,k2,1", "4,u2,k1,0"]
        )
        result = preprocess(blob, "assist09")
        assert result.report["removed"] == {"nan": 1, "dup": 1}
        assert result.report["n_records"] == 3
        assert result.meta.n_skills == 2

    def test_jsonl_round_trip(self, tmp_path):
        result = preprocess(
            scored_csv(["1,u1,kA,3", "2,u1,kA,5", "3,u2,kB,1"]), "scored"
        )
        rec_path = tmp_path / "records.jsonl"
        meta_path = tmp_path / "meta.json"
        write_records_jsonl(result.records, rec_path)
        write_meta(result.meta, meta_path)
        assert read_records_jsonl(rec_path) == result.records
        assert read_meta(meta_path) == result.meta

    def test_pipeline_is_deterministic_bytes(self, tmp_path):
        blob = assist_csv([f"{i},u{i % 5},k{i % 3},{i % 2}" for i in range(30)])
        outputs = []
        for run in range(2):
            result = preprocess(blob, "assist09")
            path = tmp_path / f"r{run}.jsonl"
            write_records_jsonl(result.records, path)
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]
