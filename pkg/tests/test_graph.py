import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ktrace.data import StudentSequence
from ktrace.errors import ConfigError
from ktrace.graph import DenseGraph, build_dense_graph


def seq(skills):
    return StudentSequence(0, [(k, 1.0) for k in skills])


def test_hand_counted_fixture():
    graph = build_dense_graph([seq([0, 1, 0, 2]), seq([1, 2, 2, 0])], 3)
    expected_counts = np.array([[0, 1, 1], [1, 0, 1], [1, 0, 1]])
    np.testing.assert_array_equal(graph.counts, expected_counts)
    expected_weights = np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [1.0, 0, 0]])
    np.testing.assert_array_equal(graph.weights, expected_weights)


def test_single_sequence_row_normalization():
    graph = build_dense_graph([seq([0, 1, 0, 2])], 3)
    np.testing.assert_array_equal(graph.weights[0], [0, 0.5, 0.5])
    np.testing.assert_array_equal(graph.weights[1], [1.0, 0, 0])


def test_skill_without_outgoing_transitions_has_zero_row():
    graph = build_dense_graph([seq([0, 1])], 3)
    np.testing.assert_array_equal(graph.weights[1], [0, 0, 0])
    np.testing.assert_array_equal(graph.weights[2], [0, 0, 0])


def test_self_transitions_counted_but_excluded_from_weights():
    graph = build_dense_graph([seq([2, 2, 0])], 3)
    assert graph.counts[2, 2] == 1
    assert graph.weights[2, 2] == 0.0
    np.testing.assert_array_equal(graph.weights[2], [1.0, 0, 0])


def test_self_in_denominator_flag():
    graph = build_dense_graph([seq([2, 2, 0])], 3, include_self_in_denominator=True)
    np.testing.assert_array_equal(graph.weights[2], [0.5, 0, 0])
    assert graph.weights[2, 2] == 0.0


@given(st.lists(st.lists(st.integers(0, 4), min_size=2, max_size=12), min_size=1, max_size=6))
def test_rows_sum_to_one_or_zero(sequences):
    graph = build_dense_graph([seq(s) for s in sequences], 5)
    sums = graph.weights.sum(axis=1)
    for row_sum in sums:
        assert abs(row_sum - 1.0) < 1e-12 or row_sum == 0.0
    assert np.all(np.diag(graph.weights) == 0.0)
    assert np.all(graph.weights >= 0.0)


def test_padding_mask_excluded_from_counts():
    padded = StudentSequence(0, [(0, 1.0), (1, 1.0), (2, 1.0)], mask=[True, True, False])
    graph = build_dense_graph([padded], 3)
    assert graph.counts[1, 2] == 0
    assert graph.counts[0, 1] == 1


def test_zero_skills_rejected():
    with pytest.raises(ConfigError):
        build_dense_graph([], 0)


def test_json_round_trip():
    graph = build_dense_graph([seq([0, 1, 0, 2]), seq([1, 2, 2, 0])], 3)
    rebuilt = DenseGraph.from_json(graph.to_json())
    np.testing.assert_array_equal(rebuilt.counts, graph.counts)
    np.testing.assert_array_equal(rebuilt.weights, graph.weights)
