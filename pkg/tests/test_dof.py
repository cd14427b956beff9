import numpy as np
import pytest

from gpsselect import InputError, PathOptions, PenaltySpec, fit, load_diabetes, standardize
from gpsselect.dof import (
    DenseTracker,
    ReducedTracker,
    dense_series,
    df_series,
    monte_carlo_df,
    reduced_replay,
    zou_df,
    zou_series,
)
from gpsselect.errors import InternalError
from gpsselect.oracle import explicit_df_product
from gpsselect.path import quiet_sign_changes
from support import gaussian_design, orthogonal_closed_form, orthonormal_design


@pytest.fixture(scope="module")
def small_path():
    d = gaussian_design(25, 6, seed=2)
    with quiet_sign_changes():
        return fit(d, PenaltySpec.genet(0.5), PathOptions(step_budget=800))


def test_diabetes_final_df_frozen():
    with quiet_sign_changes():
        path = fit(standardize(load_diabetes()))
    assert reduced_replay(path)[-1] == pytest.approx(9.89908389318771, abs=1e-9)


def test_class_trackers_match_series(small_path):
    d = small_path.design
    dense, red = DenseTracker(d.N), ReducedTracker.from_design(d.X, small_path.selected)
    a, b = [0.0], [0.0]
    for s in range(1, small_path.n_steps + 1):
        k, at = small_path.k[s], small_path.alpha_t[s]
        a.append(dense.update(d.X[:, k], at))
        b.append(red.update(k, at))
    np.testing.assert_allclose(a, dense_series(small_path), atol=1e-10)
    np.testing.assert_allclose(b, reduced_replay(small_path), atol=1e-10)


def test_explicit_product(small_path):
    np.testing.assert_allclose(explicit_df_product(small_path), dense_series(small_path), atol=1e-10)


def test_orthogonal_closed_form():
    path = fit(orthonormal_design(32, 8, seed=4), opts=PathOptions(step_budget=3000))
    np.testing.assert_allclose(reduced_replay(path), orthogonal_closed_form(path), atol=1e-10)


def test_df_bounds(small_path):
    df = reduced_replay(small_path)
    assert df[0] == 0
    assert np.all(df >= -1e-12) and np.all(df <= small_path.q + 1e-9)


def test_df_series_dispatch(small_path):
    np.testing.assert_array_equal(df_series(small_path, "dense"), dense_series(small_path))
    with pytest.raises(InputError):
        df_series(small_path, "fast")


def test_dense_tracker_rejects_bad_alpha():
    with pytest.raises(InputError):
        DenseTracker(3).update(np.ones(3), 1.5)


def test_reduced_tracker_unknown_column():
    t = ReducedTracker.from_design(np.eye(4)[:, :2], [0, 1])
    with pytest.raises(InternalError):
        t.r(3)


def test_collinear_selection_falls_back_to_dense(small_path):
    # same path, but a design in which two selected columns coincide
    d = small_path.design
    j, k = small_path.selected[:2]
    X = d.X.copy()
    X[:, k] = X[:, j]
    from gpsselect import StandardizedDesign

    twin = StandardizedDesign.from_standardized(X, d.y)
    with pytest.warns(RuntimeWarning, match="collinear"):
        df = reduced_replay(small_path, twin)
    np.testing.assert_array_equal(df, dense_series(small_path))


def test_zou(small_path):
    assert zou_df([0.0, 1.0, -2.0]) == 2
    np.testing.assert_array_equal(zou_series(small_path), small_path.nnz)


def test_monte_carlo_df_linear_smoother():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 4))
    H = X @ np.linalg.solve(X.T @ X, X.T)
    est, se = monte_carlo_df(lambda y: H @ y, X @ np.ones(4), 2.0, B=4000, seed=1)
    assert abs(est - 4.0) < 3 * se


def test_monte_carlo_df_validation():
    with pytest.raises(InputError):
        monte_carlo_df(lambda y: y, np.zeros(3), 1.0, B=10)
    with pytest.raises(InputError):
        monte_carlo_df(lambda y: y, np.zeros(3), 0.0, B=200)
