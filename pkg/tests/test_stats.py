import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy import special

from blanch_bench.fem import VmGrid
from blanch_bench.imaging import HalfProfile
from blanch_bench.stats import (
    RegressionDataset,
    build_design_matrix,
    f_survival,
    ols_fit,
    pls_fit,
    pls_predict,
    r_squared,
    read_dataset_csv,
    regularized_incomplete_beta,
    vip_scores,
    write_dataset_csv,
    write_model_report,
)
from blanch_bench.stats.ols import OlsResult

# ---------------------------------------------------------------- special


@pytest.mark.parametrize("a, b", [(1, 1), (2, 3), (0.5, 7.5), (40, 2)])
def test_beta_boundaries(a, b):
    assert regularized_incomplete_beta(a, b, 0.0) == 0.0
    assert regularized_incomplete_beta(a, b, 1.0) == 1.0


def test_beta_closed_forms():
    assert abs(regularized_incomplete_beta(1, 1, 0.5) - 0.5) <= 1e-10
    # I_x(2, 2) = x^2 (3 - 2x)
    assert abs(regularized_incomplete_beta(2, 2, 0.3) - 0.216) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 200), st.floats(0.05, 200), st.floats(0, 1))
def test_beta_matches_reference(a, b, x):
    assert abs(regularized_incomplete_beta(a, b, x) - special.betainc(a, b, x)) <= 1e-10


@pytest.mark.parametrize("args", [(0, 1, 0.5), (1, -1, 0.5), (1, 1, 1.5), (1, 1, -0.1)])
def test_beta_domain(args):
    with pytest.raises(ValueError):
        regularized_incomplete_beta(*args)


@pytest.mark.parametrize("f, d1, d2", [(0.5, 1, 22), (4.3, 1, 22), (10.0, 3, 7), (0.0, 2, 5)])
def test_f_survival_reference(f, d1, d2):
    assert f_survival(f, d1, d2) == pytest.approx(special.fdtrc(d1, d2, f), abs=1e-10)


# ---------------------------------------------------------------- OLS


def test_exact_line():
    x = np.arange(8.0)
    res = ols_fit(x, 3 * x + 1)
    assert res.slope == pytest.approx(3.0) and res.intercept == pytest.approx(1.0)
    assert res.r2 == pytest.approx(1.0)
    assert res.p_value < 1e-12


def test_permutation_oracle():
    rng = np.random.default_rng(2024)
    x = rng.normal(size=24)
    y = rng.normal(size=24)
    res = ols_fit(x, y)
    r_obs = abs(np.corrcoef(x, y)[0, 1])
    perm = np.array([abs(np.corrcoef(x, rng.permutation(y))[0, 1]) for _ in range(10_000)])
    p_perm = np.mean(perm >= r_obs)
    assert abs(res.p_value - p_perm) <= 0.02


@pytest.mark.parametrize("p, flag", [(0.01, "significant"), (0.049, "significant"), (0.05, "trend"), (0.099, "trend"), (0.1, "none"), (0.8, "none")])
def test_significance_flags(p, flag):
    assert OlsResult(1.0, 0.0, 0.5, 1.0, p, 10).flag == flag


def test_ols_minimises_residual(rng):
    x = rng.normal(size=30)
    y = 0.7 * x + rng.normal(size=30)
    res = ols_fit(x, y)
    ss = lambda s, c: float(np.sum((y - s * x - c) ** 2))  # noqa: E731
    base = ss(res.slope, res.intercept)
    for ds, dc in [(1e-3, 0), (-1e-3, 0), (0, 1e-3), (0, -1e-3)]:
        assert ss(res.slope + ds, res.intercept + dc) > base
    assert 0 <= res.r2 <= 1 and 0 <= res.p_value <= 1


def test_ols_errors():
    with pytest.raises(ValueError):
        ols_fit([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        ols_fit([1.0, 2.0], [1.0, 2.0])


# ---------------------------------------------------------------- PLS


def test_univariate_exact_fit():
    x = np.linspace(1, 5, 9)[:, None]
    model = pls_fit(x, 2 * x[:, 0])
    assert model.n_components == 1
    assert model.fitted_r2 == pytest.approx(1.0)
    assert model.coefficients[0] == pytest.approx(2.0)
    assert pls_predict(model, [[10.0]])[0] == pytest.approx(20.0)
    assert_allclose(vip_scores(model), [1.0])


@pytest.mark.parametrize("n_components", [None, 1])
def test_duplicated_column(n_components):
    x1 = np.linspace(-2, 3, 12)
    X = np.column_stack([x1, x1])
    model = pls_fit(X, x1, n_components=n_components)
    assert model.n_components == 1
    assert model.coefficients[0] == pytest.approx(model.coefficients[1])
    assert model.fitted_r2 == pytest.approx(1.0)


def _ols_predictions(X, y):
    A = np.column_stack([np.ones(len(y)), X])
    beta = np.linalg.solve(A.T @ A, A.T @ y)
    return A @ beta


@pytest.mark.parametrize("scale", [True, False])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_full_rank_pls_equals_ols(seed, scale):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 5)) * [1, 2, 0.5, 3, 1]
    y = X @ rng.normal(size=5) + rng.normal(size=40)
    model = pls_fit(X, y, n_components=5, scale=scale)
    ref = _ols_predictions(X, y)
    assert np.abs(pls_predict(model, X) - ref).max() <= 1e-8 * np.abs(ref).max()


def test_predict_at_means_gives_y_mean(rng):
    X = rng.normal(size=(20, 4))
    y = rng.normal(size=20)
    model = pls_fit(X, y, n_components=2)
    assert_allclose(pls_predict(model, np.tile(X.mean(axis=0), (3, 1))), y.mean(), rtol=1e-12)
    assert r_squared(y, pls_predict(model, X)) == pytest.approx(model.fitted_r2, rel=1e-12)
    with pytest.raises(ValueError):
        pls_predict(model, np.zeros((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 30), st.integers(1, 8), st.booleans())
def test_model_invariants(seed, n, p, scale):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    y = X @ rng.normal(size=p) + rng.normal(size=n)
    a_max = min(n - 1, p)
    r2 = []
    for a in range(1, a_max + 1):
        model = pls_fit(X, y, n_components=a, scale=scale)
        assert np.all(np.diff(model.x_residual_norms) <= 1e-9 * model.x_residual_norms[0])
        assert abs(np.mean(vip_scores(model) ** 2) - 1.0) <= 1e-10
        r2.append(model.fitted_r2)
    assert np.all(np.diff(r2) >= -1e-10)


def test_scaling_invariance(rng):
    X = rng.normal(size=(25, 6))
    y = X[:, 0] - X[:, 3] + 0.1 * rng.normal(size=25)
    s = rng.uniform(0.1, 10, 6)
    a = pls_fit(X, y, n_components=3)
    b = pls_fit(X * s, y, n_components=3)
    assert_allclose(pls_predict(a, X), pls_predict(b, X * s), rtol=1e-10)


def test_vip_identifies_relevant_column():
    rng = np.random.default_rng(50)
    X = rng.normal(size=(50, 2))
    y = 3 * X[:, 0] + 0.1 * rng.normal(size=50)
    vip = vip_scores(pls_fit(X, y))
    assert vip[0] > 1 > vip[1]


def test_sign_convention(rng):
    X = rng.normal(size=(20, 4))
    y = rng.normal(size=20)
    W = pls_fit(X, y, n_components=3).weights
    for w in W.T:
        assert w[np.argmax(np.abs(w))] > 0
    flipped = pls_fit(X, -y, n_components=3).weights
    for w in flipped.T:
        assert w[np.argmax(np.abs(w))] > 0


def test_cv_picks_small_model_for_one_factor_data(rng):
    t = rng.normal(size=30)
    X = np.outer(t, rng.normal(size=8)) + 0.01 * rng.normal(size=(30, 8))
    y = 2 * t + 0.5 * rng.normal(size=30)
    model = pls_fit(X, y)
    assert model.n_components == 1
    assert set(model.cv_press) == set(range(1, 9))


def test_pls_errors(rng):
    X = rng.normal(size=(10, 3))
    with pytest.raises(ValueError):
        pls_fit(X, np.ones(10))
    with pytest.raises(ValueError):
        pls_fit(X, rng.normal(size=10), n_components=4)
    with pytest.raises(ValueError):
        pls_fit(X, rng.normal(size=10), n_components=0)


def test_r_squared_examples():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    assert r_squared(y, y) == 1.0
    assert r_squared(y, np.full(4, y.mean())) == 0.0
    assert r_squared(y, [1.1, 1.9, 3.2, 3.8]) == pytest.approx(0.98, abs=1e-12)
    with pytest.raises(ValueError):
        r_squared([2.0, 2.0], [1.0, 3.0])


# ---------------------------------------------------------------- datasets


def _grid(rng, lat=np.round(np.arange(71) * 0.1, 10), ndep=21):
    return VmGrid(lat, np.round(np.arange(ndep) * 0.1, 10), rng.uniform(0, 1e4, (lat.size, ndep)), 0.1)


def test_matching_axes(rng):
    grid = _grid(rng)
    y = rng.normal(size=71)
    data = build_design_matrix(grid, HalfProfile(grid.lateral_coords, y))
    assert data.X.shape == (71, 21) and data.y.size == 71
    assert_array_equal(data.y, y)


def test_half_rate_profile_interpolates_linear_exactly(rng):
    grid = _grid(rng)
    d = np.linspace(0, 7, 36)
    data = build_design_matrix(grid, HalfProfile(d, 2.0 - 0.3 * d))
    assert_allclose(data.y, 2.0 - 0.3 * grid.lateral_coords, rtol=1e-12)


def test_disjoint_and_short_overlap(rng):
    grid = _grid(rng)
    with pytest.raises(ValueError, match="disjoint"):
        build_design_matrix(grid, HalfProfile(np.linspace(10, 14, 9), np.ones(9)))
    with pytest.raises(ValueError):
        build_design_matrix(grid, HalfProfile(np.linspace(4, 14, 9), np.ones(9)))
    coarse = VmGrid(np.array([0.0, 7.0]), np.array([0.0, 1.0]), np.ones((2, 2)), 1.0)
    with pytest.raises(ValueError):
        build_design_matrix(coarse, HalfProfile(np.linspace(0, 7, 8), np.arange(8.0)))


def test_dataset_invariants():
    with pytest.raises(ValueError):
        RegressionDataset(np.ones((3, 2)), np.ones(3), [0, 2, 1], [0, 1])
    with pytest.raises(ValueError):
        RegressionDataset(np.full((3, 2), np.nan), np.ones(3), [0, 1, 2], [0, 1])


def test_dataset_csv_round_trip(tmp_path, rng):
    grid = _grid(rng)
    data = build_design_matrix(grid, HalfProfile(grid.lateral_coords, rng.normal(size=71)))
    write_dataset_csv(data, tmp_path / "d.csv")
    header = (tmp_path / "d.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "lateral_mm" and header[1] == "depth_0mm" and header[2] == "depth_0.1mm"
    assert header[-1] == "color_change"
    back = read_dataset_csv(tmp_path / "d.csv")
    assert_array_equal(back.X, data.X)
    assert_array_equal(back.depth_coords, data.depth_coords)


def test_model_report(tmp_path, rng):
    grid = _grid(rng, ndep=4)
    data = build_design_matrix(grid, HalfProfile(grid.lateral_coords, grid.values @ [1, 0, 0, 0]))
    model = pls_fit(data, n_components=2)
    write_model_report(model, data.depth_coords, tmp_path / "m.json")
    rep = json.loads((tmp_path / "m.json").read_text())
    assert rep["n_components"] == 2 and len(rep["vip"]) == 4 and rep["depth_mm"] == [0.0, 0.1, 0.2, 0.3]
    assert rep["vip_gt_1"] == [v > 1 for v in rep["vip"]]
    assert 0 <= rep["r2"] <= 1
