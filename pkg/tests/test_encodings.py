import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ktrace.data import OBJECTIVE, SUBJECTIVE
from ktrace.encodings import (
    EncodedStep,
    decode_dkvmn_index,
    dkt_input_batch,
    dkvmn_index_batch,
    encode_dkt_objective,
    encode_dkt_subjective,
    encode_dkvmn,
    encode_gkt,
    interpolate_rows,
    quantize_score,
)
from ktrace.errors import DataError


class TestDktObjective:
    def test_correct_answer_lands_in_second_block(self):
        step = encode_dkt_objective(0, 1, 3)
        np.testing.assert_array_equal(step.dense, [0, 0, 0, 1, 0, 0])

    def test_incorrect_answer_lands_in_first_block(self):
        step = encode_dkt_objective(2, 0, 3)
        np.testing.assert_array_equal(step.dense, [0, 0, 1, 0, 0, 0])

    @given(st.integers(0, 7), st.integers(0, 1))
    def test_one_hot_law(self, skill, outcome):
        dense = encode_dkt_objective(skill, outcome, 8).dense
        assert dense.sum() == 1.0
        assert dense[skill + outcome * 8] == 1.0

    @given(st.tuples(st.integers(0, 7), st.integers(0, 1)),
           st.tuples(st.integers(0, 7), st.integers(0, 1)))
    def test_injective(self, first, second):
        a = encode_dkt_objective(*first, 8).dense
        b = encode_dkt_objective(*second, 8).dense
        assert (first == second) == bool(np.array_equal(a, b))

    def test_out_of_range_skill(self):
        with pytest.raises(DataError):
            encode_dkt_objective(3, 1, 3)


class TestDktSubjective:
    def test_marker_and_score_positions(self):
        step = encode_dkt_subjective(1, 0.5, 3)
        np.testing.assert_array_equal(step.dense, [0, 1, 0, 0, 0.5, 0])

    def test_zero_score_leaves_second_block_empty(self):
        step = encode_dkt_subjective(2, 0.0, 3)
        np.testing.assert_array_equal(step.dense, [0, 0, 1, 0, 0, 0])
        assert step.dense[:3].sum() == 1.0  # attempt still marked

    @given(st.integers(0, 5))
    def test_zero_score_equals_objective_incorrect(self, skill):
        subjective = encode_dkt_subjective(skill, 0.0, 6).dense
        objective = encode_dkt_objective(skill, 0, 6).dense
        np.testing.assert_array_equal(subjective, objective)

    @given(st.integers(0, 5))
    def test_full_score_carries_the_objective_correct_bit(self, skill):
        # the literal encoding keeps the attempt marker, so at a=1 it is the
        # objective correct one-hot plus that marker
        subjective = encode_dkt_subjective(skill, 1.0, 6).dense
        objective = encode_dkt_objective(skill, 1, 6).dense
        np.testing.assert_array_equal(subjective[6:], objective[6:])
        assert subjective[skill] == 1.0 and subjective.sum() == 2.0

    def test_score_range_enforced(self):
        with pytest.raises(DataError):
            encode_dkt_subjective(0, 1.5, 3)


class TestDkvmn:
    def test_objective_index(self):
        assert encode_dkvmn(4, 1.0, 10, OBJECTIVE) == (4, 14)
        assert encode_dkvmn(4, 0.0, 10, OBJECTIVE) == (4, 4)

    def test_subjective_floor_case(self):
        assert encode_dkvmn(2, 0.0, 5, SUBJECTIVE, bins=5) == (2, 2)

    def test_subjective_quantizer(self):
        # 0.55 * 4 = 2.2 -> level 2 -> 2 + 2*5
        assert encode_dkvmn(2, 0.55, 5, SUBJECTIVE, bins=5) == (2, 12)

    def test_quantize_score_half_up(self):
        assert quantize_score(0.55, 5) == 2
        assert quantize_score(0.625, 5) == 3  # 2.5 rounds up
        assert quantize_score(1.0, 5) == 4
        assert quantize_score(0.0, 5) == 0

    @given(st.integers(0, 9), st.floats(0, 1, allow_nan=False), st.integers(2, 11))
    def test_index_bounds_and_decode(self, skill, score, bins):
        _, index = encode_dkvmn(skill, score, 10, SUBJECTIVE, bins=bins)
        assert 0 <= index < bins * 10
        decoded_skill, decoded_level = decode_dkvmn_index(index, 10)
        assert decoded_skill == skill
        assert decoded_level == quantize_score(score, bins)

    @given(st.tuples(st.integers(0, 9), st.integers(0, 1)),
           st.tuples(st.integers(0, 9), st.integers(0, 1)))
    def test_objective_injective(self, first, second):
        a = encode_dkvmn(first[0], float(first[1]), 10, OBJECTIVE)
        b = encode_dkvmn(second[0], float(second[1]), 10, OBJECTIVE)
        assert (first == second) == (a == b)


class TestGkt:
    def test_objective_row_index(self):
        step = encode_gkt(1, 0.0, 4, OBJECTIVE)
        assert step.kind == "index" and step.index == 1
        step = encode_gkt(1, 1.0, 4, OBJECTIVE)
        assert step.index == 5

    def test_subjective_keeps_the_pair(self):
        step = encode_gkt(2, 0.75, 4, SUBJECTIVE)
        assert step.kind == "gkt_pair" and step.pair == (2, 0.75)

    def test_interpolation_limits_recover_rows(self):
        rng = np.random.default_rng(0)
        table = rng.normal(size=(8, 3))
        np.testing.assert_array_equal(interpolate_rows(table, 2, 1.0, 4), table[6])
        np.testing.assert_array_equal(interpolate_rows(table, 2, 0.0, 4), table[2])

    def test_interpolation_midpoint(self):
        rng = np.random.default_rng(1)
        table = rng.normal(size=(6, 2))
        mid = interpolate_rows(table, 1, 0.5, 3)
        np.testing.assert_allclose(mid, (table[1] + table[4]) / 2, rtol=1e-15)


class TestEncodedStep:
    def test_payload_must_match_kind(self):
        with pytest.raises(DataError):
            EncodedStep(kind="index", dense=np.zeros(4))
        with pytest.raises(DataError):
            EncodedStep(kind="dkt_dense", dense=np.zeros(4), index=1)


class TestBatchFormsMatchScalarEncoders:
    @given(st.integers(0, 2**31 - 1))
    def test_dkt_objective_batch(self, seed):
        rng = np.random.default_rng(seed)
        t_len, batch, n = 4, 3, 5
        skills = rng.integers(0, n, size=(t_len, batch))
        outcomes = rng.integers(0, 2, size=(t_len, batch)).astype(float)
        mask = rng.random((t_len, batch)) < 0.8
        dense = dkt_input_batch(skills, outcomes, mask, n, OBJECTIVE)
        for t in range(t_len):
            for b in range(batch):
                if mask[t, b]:
                    expected = encode_dkt_objective(skills[t, b], int(outcomes[t, b]), n).dense
                else:
                    expected = np.zeros(2 * n)
                np.testing.assert_array_equal(dense[t, b], expected)

    @given(st.integers(0, 2**31 - 1))
    def test_dkt_subjective_batch(self, seed):
        rng = np.random.default_rng(seed)
        t_len, batch, n = 3, 2, 4
        skills = rng.integers(0, n, size=(t_len, batch))
        outcomes = rng.integers(0, 5, size=(t_len, batch)) / 4.0
        mask = rng.random((t_len, batch)) < 0.8
        dense = dkt_input_batch(skills, outcomes, mask, n, SUBJECTIVE)
        for t in range(t_len):
            for b in range(batch):
                if mask[t, b]:
                    expected = encode_dkt_subjective(skills[t, b], outcomes[t, b], n).dense
                    np.testing.assert_array_equal(dense[t, b], expected)

    @given(st.integers(0, 2**31 - 1))
    def test_dkvmn_batch(self, seed):
        rng = np.random.default_rng(seed)
        t_len, batch, n, bins = 3, 4, 5, 4
        skills = rng.integers(0, n, size=(t_len, batch))
        outcomes = rng.integers(0, bins, size=(t_len, batch)) / (bins - 1)
        mask = np.ones((t_len, batch), dtype=bool)
        idx = dkvmn_index_batch(skills, outcomes, mask, n, SUBJECTIVE, bins)
        for t in range(t_len):
            for b in range(batch):
                _, expected = encode_dkvmn(skills[t, b], outcomes[t, b], n, SUBJECTIVE, bins)
                assert idx[t, b] == expected

    def test_objective_batch_rejects_graded_outcomes(self):
        skills = np.zeros((2, 1), dtype=int)
        outcomes = np.array([[0.5], [1.0]])
        mask = np.ones((2, 1), dtype=bool)
        with pytest.raises(DataError):
            dkt_input_batch(skills, outcomes, mask, 3, OBJECTIVE)
