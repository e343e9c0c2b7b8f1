"""
Tests for metric space construction, validation and repair
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import InvalidInputError, MetricViolationError, ShapeError
from instance_io import FOUR_CYCLE, gen_strip
from metric_core import (
    FiniteMetricSpace,
    euclidean_embed,
    metric_repair,
    random_metric,
    validate_metric,
)


def test_two_point_metric_is_valid():
    assert validate_metric([[0, 1], [1, 0]]) == []


def test_triangle_violation_witness():
    violations = validate_metric([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert len(violations) == 1
    v = violations[0]
    assert v.kind == "triangle"
    assert v.witness == (0, 1, 2)
    assert v.magnitude == 3


def test_four_cycle_passes_all_triples():
    assert validate_metric(FOUR_CYCLE) == []


def test_every_axiom_reported():
    m = [[0.5, -1, 2], [1, 0, 0], [2, 0, 0]]
    kinds = {v.kind for v in validate_metric(m)}
    assert {"nonzero-diagonal", "asymmetry", "negative", "zero-offdiagonal"} <= kinds


def test_tolerance_absorbs_rounding():
    m = [[0, 1, 2 + 1e-12], [1, 0, 1], [2 + 1e-12, 1, 0]]
    assert validate_metric(m) == []
    assert validate_metric(m, eps_metric=0.0)[0].kind == "triangle"


def test_non_square_matrix():
    with pytest.raises(ShapeError):
        validate_metric([[0, 1, 2], [1, 0, 1]])


def test_space_rejects_invalid_matrix():
    with pytest.raises(MetricViolationError) as info:
        FiniteMetricSpace(dist=[[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert info.value.violations[0].witness == (0, 1, 2)


def test_space_is_read_only():
    space = FiniteMetricSpace(dist=FOUR_CYCLE)
    with pytest.raises(ValueError):
        space.dist[0, 1] = 3.0


def test_repair_shortcuts_long_edge():
    repaired = metric_repair([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    np.testing.assert_array_equal(repaired.dist, [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


def test_repair_is_identity_on_metrics():
    np.testing.assert_array_equal(metric_repair(FOUR_CYCLE).dist, FOUR_CYCLE)


@pytest.mark.parametrize("bad", [
    [[0, -1], [-1, 0]],
    [[0, 1], [2, 0]],
    [[0, 0], [0, 0]],
])
def test_repair_rejects_invalid_input(bad):
    with pytest.raises(InvalidInputError):
        metric_repair(bad)


@st.composite
def integer_symmetric(draw):
    n = draw(st.integers(2, 7))
    values = draw(st.lists(st.integers(1, 20), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    d = np.zeros((n, n))
    d[np.triu_indices(n, 1)] = values
    return d + d.T


@given(integer_symmetric())
def test_repair_output_is_metric_and_dominated(matrix):
    repaired = metric_repair(matrix)
    assert validate_metric(repaired.dist) == []
    assert np.all(repaired.dist <= matrix)


@given(integer_symmetric())
def test_repair_is_idempotent(matrix):
    once = metric_repair(matrix).dist
    np.testing.assert_array_equal(metric_repair(once).dist, once)


def test_random_six_point_matrix_repairs_to_metric():
    rng = np.random.default_rng(3)
    d = np.triu(rng.uniform(0.1, 5.0, size=(6, 6)), k=1)
    assert validate_metric(metric_repair(d + d.T).dist) == []


def test_euclidean_unit_segment():
    assert euclidean_embed([(0, 0), (1, 0)]).dist[0, 1] == 1


def test_euclidean_right_triangle():
    assert euclidean_embed([(0, 0), (0, 1), (1, 0)]).dist[1, 2] == pytest.approx(math.sqrt(2), abs=1e-15)


def test_euclidean_rejects_duplicates():
    with pytest.raises(InvalidInputError):
        euclidean_embed([(0, 0), (1, 1), (0, 0)])


def test_euclidean_rejects_ragged_points():
    with pytest.raises(InvalidInputError):
        euclidean_embed([(0, 0), (1, 1, 1)])


def test_strip_points_form_a_metric():
    assert validate_metric(gen_strip(8, 2).space.dist) == []


def test_random_metric_two_points():
    space = random_metric(seed=1, n=2, scale=1)
    assert space.n == 2
    assert 0 < space.dist[0, 1] <= 1


def test_random_metric_is_deterministic():
    a = random_metric(seed=7, n=8, scale=10)
    b = random_metric(seed=7, n=8, scale=10)
    np.testing.assert_array_equal(a.dist, b.dist)


def test_random_metric_rejects_single_point():
    with pytest.raises(InvalidInputError):
        random_metric(seed=0, n=1, scale=1)


def test_thousand_random_metrics_are_valid():
    for seed in range(1000):
        assert validate_metric(random_metric(seed, 10, scale=10.0).dist) == []


def test_lattice_draws_stay_on_lattice():
    space = random_metric(seed=5, n=9, scale=10.0, levels=4)
    off = space.dist[~np.eye(9, dtype=bool)]
    np.testing.assert_array_equal(off % 2.5, 0)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_random_metric_repair_idempotent(seed, n):
    space = random_metric(seed, n, scale=10.0)
    np.testing.assert_allclose(metric_repair(space.dist).dist, space.dist, rtol=0, atol=1e-12)


def test_subspace_keeps_distances():
    space = FiniteMetricSpace(dist=FOUR_CYCLE, labels=("a1", "a2", "b1", "b2"))
    sub, keep = space.subspace([3, 0])
    assert keep == (0, 3)
    assert sub.labels == ("a1", "b2")
    assert sub.dist[0, 1] == 2


def test_scaled_space():
    space = FiniteMetricSpace(dist=FOUR_CYCLE).scaled(3)
    assert space.dist[0, 3] == 6
    with pytest.raises(InvalidInputError):
        FiniteMetricSpace(dist=FOUR_CYCLE).scaled(0)
