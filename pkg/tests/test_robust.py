"""Location and scatter estimator tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signlda import (
    default_ridge,
    pooled_sample_covariance,
    pooled_sign_covariance,
    ridge_stabilize,
    sample_mean,
    sign_covariance,
    spatial_median,
    spatial_sign,
)

from oracles import fermat_point_offset


# ---------------------------------------------------------------------------
# spatial_sign

def test_sign_three_four_five():
    assert np.allclose(spatial_sign(np.array([3.0, 4.0])), [0.6, 0.8], atol=1e-15)


def test_sign_zero_vector_maps_to_zero():
    assert np.array_equal(spatial_sign(np.zeros(3)), np.zeros(3))


def test_sign_axis_vector():
    assert np.allclose(spatial_sign(np.array([-2.0, 0.0])), [-1.0, 0.0], atol=1e-15)


def test_sign_rowwise_matrix():
    out = spatial_sign(np.array([[3.0, 4.0], [0.0, 0.0]]))
    assert np.allclose(out[0], [0.6, 0.8], atol=1e-15)
    assert np.array_equal(out[1], [0.0, 0.0])


# Entries whose squares underflow to subnormals lose norm precision, so keep
# magnitudes in a range where the invariant is a float fact.
_entry = st.one_of(st.just(0.0), st.floats(1e-6, 1e6), st.floats(-1e6, -1e-6))


@given(st.lists(_entry, min_size=1, max_size=8))
def test_sign_norm_is_zero_or_one(values):
    out = spatial_sign(np.asarray(values))
    norm = np.linalg.norm(out)
    assert norm == pytest.approx(0.0, abs=1e-14) or norm == pytest.approx(1.0, abs=1e-14)


def test_sign_rejects_non_finite():
    with pytest.raises(ValueError):
        spatial_sign(np.array([1.0, np.nan]))


# ---------------------------------------------------------------------------
# spatial_median

def test_median_single_row_is_that_row():
    est = spatial_median(np.array([[5.0, -3.0]]))
    assert np.array_equal(est.center, [5.0, -3.0])
    assert est.converged


def test_median_symmetric_cross():
    rows = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    est = spatial_median(rows)
    assert np.allclose(est.center, [0.0, 0.0], atol=1e-10)


def test_median_fermat_point_matches_golden_section_oracle():
    rows = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    est = spatial_median(rows)
    t_star = fermat_point_offset()
    assert np.allclose(est.center, [t_star, t_star], atol=1e-6)


def test_median_returns_data_point_exactly_when_it_minimizes():
    # (0,0) dominates: the unit vectors toward the other four points cancel.
    rows = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [-10.0, 0.0], [0.0, -10.0]])
    est = spatial_median(rows)
    assert np.array_equal(est.center, [0.0, 0.0])
    assert est.final_step_norm == 0.0
    assert est.converged


def test_median_all_rows_identical():
    rows = np.tile([2.0, 7.0], (6, 1))
    est = spatial_median(rows)
    assert np.array_equal(est.center, [2.0, 7.0])


def test_median_objective_history_non_increasing():
    rng = np.random.default_rng(3)
    for _ in range(10):
        rows = rng.standard_t(df=2, size=(30, 4))
        est = spatial_median(rows)
        hist = np.asarray(est.objective_history)
        assert np.all(np.diff(hist) <= 1e-9 * np.maximum(1.0, hist[:-1]))


def test_median_step_norm_below_tol_when_converged():
    rng = np.random.default_rng(4)
    rows = rng.normal(size=(40, 3))
    est = spatial_median(rows, tol=1e-8, max_iter=500)
    assert est.converged
    assert est.iterations < 500
    assert est.final_step_norm <= 1e-8


def test_median_non_convergence_reports_status():
    rng = np.random.default_rng(5)
    rows = rng.normal(size=(50, 3))
    est = spatial_median(rows, tol=1e-15, max_iter=2)
    assert not est.converged
    assert est.iterations == 2
    assert est.center.shape == (3,)


def test_median_breakdown_smoke_against_mean():
    rng = np.random.default_rng(6)
    rows = rng.normal(size=(50, 4))
    clean_median = spatial_median(rows).center
    clean_mean = sample_mean(rows)
    dirty = rows.copy()
    dirty[0] = 1e6
    median_shift = np.linalg.norm(spatial_median(dirty).center - clean_median)
    mean_shift = np.linalg.norm(sample_mean(dirty) - clean_mean)
    assert median_shift < mean_shift


@st.composite
def _sample_and_shift(draw):
    n = draw(st.integers(2, 12))
    p = draw(st.integers(1, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    rows = rng.uniform(-50.0, 50.0, size=(n, p))
    shift = rng.uniform(-100.0, 100.0, size=p)
    return rows, shift, seed


# Near-degenerate triangles (a vertex angle just under 120 degrees) make
# Weiszfeld sublinear, so the step-norm stop must be well below the asserted
# geometric tolerance.
_TIGHT = dict(tol=1e-10, max_iter=50_000)


@settings(deadline=None, max_examples=40)
@given(_sample_and_shift())
def test_median_translation_equivariance(case):
    rows, shift, _ = case
    base = spatial_median(rows, **_TIGHT).center
    moved = spatial_median(rows + shift, **_TIGHT).center
    assert np.allclose(moved, base + shift, atol=1e-6)


@settings(deadline=None, max_examples=40)
@given(_sample_and_shift())
def test_median_orthogonal_equivariance(case):
    rows, _, seed = case
    p = rows.shape[1]
    q, _ = np.linalg.qr(np.random.default_rng(seed + 1).normal(size=(p, p)))
    base = spatial_median(rows, **_TIGHT).center
    rotated = spatial_median(rows @ q.T, **_TIGHT).center
    assert np.allclose(rotated, q @ base, atol=1e-6)


# ---------------------------------------------------------------------------
# sign_covariance

def test_sign_covariance_cross_is_half_identity():
    rows = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    out = sign_covariance(rows, np.zeros(2))
    assert np.allclose(out, 0.5 * np.eye(2), atol=1e-15)


def test_sign_covariance_rank_one():
    rows = np.array([[2.0, 0.0], [7.0, 0.0]])
    out = sign_covariance(rows, np.zeros(2))
    assert np.allclose(out, [[1.0, 0.0], [0.0, 0.0]], atol=1e-15)


def test_sign_covariance_trace_counts_off_center_rows():
    rows = np.array([[1.0, 1.0], [1.0, 1.0], [3.0, 0.0], [0.0, 5.0]])
    out = sign_covariance(rows, np.array([1.0, 1.0]))
    assert np.trace(out) == pytest.approx(2.0 / 4.0, abs=1e-12)


def test_sign_covariance_unit_trace_on_generic_data():
    rng = np.random.default_rng(7)
    rows = rng.normal(size=(60, 5))
    center = spatial_median(rows).center
    out = sign_covariance(rows, center)
    assert abs(np.trace(out) - 1.0) <= 1e-10
    assert np.abs(out - out.T).max() <= 1e-12
    assert np.linalg.eigvalsh(out).min() >= -1e-10


def test_sign_covariance_orthogonal_equivariance():
    rng = np.random.default_rng(8)
    rows = rng.normal(size=(40, 4))
    center = spatial_median(rows).center
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    base = sign_covariance(rows, center)
    rotated = sign_covariance(rows @ q.T, q @ center)
    assert np.allclose(rotated, q @ base @ q.T, atol=1e-8)


def test_sign_covariance_center_length_mismatch():
    with pytest.raises(ValueError):
        sign_covariance(np.ones((3, 2)), np.zeros(3))


# ---------------------------------------------------------------------------
# pooled estimators

def test_pooled_sign_covariance_equal_inputs():
    m = np.array([[0.6, 0.1], [0.1, 0.4]])
    assert np.allclose(pooled_sign_covariance(m, m, 5, 9), m, atol=1e-15)


def test_pooled_sign_covariance_balanced():
    out = pooled_sign_covariance(0.5 * np.eye(2), 0.5 * np.eye(2), 4, 4)
    assert np.allclose(out, 0.5 * np.eye(2), atol=1e-15)


def test_pooled_sign_covariance_weights():
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    b = np.array([[0.0, 0.0], [0.0, 1.0]])
    out = pooled_sign_covariance(a, b, 3, 1)
    assert np.allclose(out, 0.75 * a + 0.25 * b, atol=1e-15)


def test_pooled_sign_covariance_trace_identity_exact():
    rng = np.random.default_rng(9)
    rows1 = rng.normal(size=(11, 3))
    rows2 = rng.normal(size=(7, 3))
    s1 = sign_covariance(rows1, spatial_median(rows1).center)
    s2 = sign_covariance(rows2, spatial_median(rows2).center)
    pooled = pooled_sign_covariance(s1, s2, 11, 7)
    expected = (11 * np.trace(s1) + 7 * np.trace(s2)) / 18
    assert np.trace(pooled) == pytest.approx(expected, abs=1e-14)


def test_pooled_sign_covariance_shape_mismatch():
    with pytest.raises(ValueError):
        pooled_sign_covariance(np.eye(2), np.eye(3), 2, 2)


def test_sample_mean_examples():
    assert np.array_equal(sample_mean([[1.0, 1.0], [3.0, 3.0]]), [2.0, 2.0])
    assert np.array_equal(sample_mean([[4.0, -1.0]]), [4.0, -1.0])
    assert np.array_equal(sample_mean([[0.0, 0.0], [0.0, 0.0]]), [0.0, 0.0])


def test_pooled_sample_covariance_constant_rows():
    s1 = np.tile([1.0, 2.0], (4, 1))
    s2 = np.tile([-3.0, 5.0], (3, 1))
    assert np.allclose(pooled_sample_covariance(s1, s2), np.zeros((2, 2)), atol=1e-15)


def test_pooled_sample_covariance_one_dim_example():
    s1 = np.array([[-1.0], [1.0]])
    s2 = np.array([[-2.0], [2.0]])
    out = pooled_sample_covariance(s1, s2)
    assert out.shape == (1, 1)
    assert out[0, 0] == pytest.approx(2.5, abs=1e-14)


def test_pooled_sample_covariance_symmetric_psd():
    rng = np.random.default_rng(10)
    out = pooled_sample_covariance(rng.normal(size=(20, 4)), rng.normal(size=(15, 4)))
    assert np.abs(out - out.T).max() <= 1e-12
    assert np.linalg.eigvalsh(out).min() >= -1e-10


# ---------------------------------------------------------------------------
# ridge

def test_ridge_examples():
    assert np.allclose(ridge_stabilize(0.5 * np.eye(2), 0.1), 0.6 * np.eye(2), atol=1e-15)
    m = np.array([[0.3, 0.1], [0.1, 0.7]])
    assert np.array_equal(ridge_stabilize(m, 0.0), m)


def test_default_ridge_matches_formula():
    value = default_ridge(100, 400)
    assert value == pytest.approx(math.sqrt(math.log(100) / 400), abs=1e-15)
    assert value == pytest.approx(0.10729, abs=1e-4)


def test_default_ridge_rejects_bad_counts():
    with pytest.raises(ValueError):
        default_ridge(0, 10)
    with pytest.raises(ValueError):
        default_ridge(10, 0)


def test_ridge_rejects_negative():
    with pytest.raises(ValueError):
        ridge_stabilize(np.eye(2), -0.5)
