"""Forecast assembly: score forecasts, variance stacking, intervals,
back-transform, and the end-to-end estimator."""

import numpy as np
import pytest
from sklearn.base import clone

from ratecast import (ArimaFit, ArimaSpec, SurfaceForecaster, back_transform,
                      box_cox, forecast_scores, inv_box_cox, point_forecast,
                      prediction_interval, total_variance, transform_surface)
from ratecast.decomposition import SurfaceDecomposition, decompose
from ratecast.forecasting import RATE_CLAMP_FLOOR


def make_decomposition(scores, components, mean=None, resid=None):
    n, k = scores.shape
    p = components.shape[1]
    return SurfaceDecomposition(
        years=np.arange(2000, 2000 + n), ages=np.arange(20, 20 + p),
        mean=np.zeros(p) if mean is None else mean,
        components=components, scores=scores,
        singular_values=np.ones(min(n, p)),
        residual_variances=np.zeros(p) if resid is None else resid,
        lam=0.5,
    )


def ar1_fit(phi, sigma2=1.0):
    return ArimaFit(spec=ArimaSpec(1, 0, 0), ar_coeffs=np.array([phi]),
                    ma_coeffs=np.empty(0), drift_coeff=0.0, sigma2=sigma2,
                    loglik=0.0, aicc=0.0, n_effective=50)


# ---------------------------------------------------------------------------
# forecast_scores
# ---------------------------------------------------------------------------

def test_exact_random_walk_scores_forecast_flat():
    # seed chosen so the automatic search lands on the pure random walk
    # (0,1,0); its forecast is then exactly flat at the last score
    rng = np.random.default_rng(1)
    walk = np.cumsum(rng.standard_normal(60))
    scores = walk[:, None]
    comp = np.ones((1, 4)) / 2.0
    decomp = make_decomposition(scores, comp)
    fc = forecast_scores(decomp, 5)
    assert fc.fits[0].spec.d == 1
    assert fc.fits[0].spec.p == 0 and fc.fits[0].spec.q == 0
    assert np.allclose(fc.points[:, 0], walk[-1], atol=1e-10)


def test_two_components_give_two_series():
    rng = np.random.default_rng(1)
    scores = np.cumsum(rng.standard_normal((40, 2)), axis=0)
    comp = np.eye(2, 6)
    decomp = make_decomposition(scores, comp)
    fc = forecast_scores(decomp, 7)
    assert fc.points.shape == (7, 2)
    assert fc.variances.shape == (7, 2)
    assert len(fc.fits) == 2


def test_ar1_scores_decay_geometrically():
    # closed form with a fixed AR(1) model supplied for the score series
    phi = 0.6
    scores = np.array([[0.0]] * 29 + [[2.0]])
    decomp = make_decomposition(scores, np.ones((1, 3)))
    fc = forecast_scores(decomp, 6, fits=(ar1_fit(phi),))
    expected = 2.0 * phi ** np.arange(1, 7)
    assert np.allclose(fc.points[:, 0], expected, atol=1e-10)


# ---------------------------------------------------------------------------
# point_forecast / total_variance
# ---------------------------------------------------------------------------

def test_zero_score_forecasts_return_mean_curve():
    mean = np.array([1.0, 2.0, 3.0])
    decomp = make_decomposition(np.zeros((10, 1)), np.ones((1, 3)) / 3.0,
                                mean=mean)
    fc = forecast_scores(decomp, 4, fits=(ar1_fit(0.5),))
    z = point_forecast(decomp, fc)
    assert np.allclose(z, np.tile(mean, (4, 1)))


def test_single_coordinate_bump():
    comp = np.zeros((1, 5))
    comp[0, 2] = 1.0
    scores = np.full((12, 1), 2.0)  # constant series, forecast stays at 2
    decomp = make_decomposition(scores, comp, mean=np.ones(5))
    fc = forecast_scores(decomp, 1, fits=(
        ArimaFit(spec=ArimaSpec(0, 0, 0, drift=True), ar_coeffs=np.empty(0),
                 ma_coeffs=np.empty(0), drift_coeff=2.0, sigma2=1.0,
                 loglik=0.0, aicc=0.0, n_effective=12),))
    z = point_forecast(decomp, fc)
    expected = np.ones(5)
    expected[2] += 2.0
    assert np.allclose(z[0], expected)


def test_point_forecast_matches_matrix_multiplication():
    rng = np.random.default_rng(2)
    mean = rng.normal(size=3)
    components = rng.normal(size=(2, 3))
    points = rng.normal(size=(4, 2))
    decomp = make_decomposition(np.zeros((10, 2)), components, mean=mean)
    from ratecast.forecasting import ScoreForecast
    fc = ScoreForecast(points=points, variances=np.zeros((4, 2)),
                       fits=(ar1_fit(0.1), ar1_fit(0.1)))
    z = point_forecast(decomp, fc)
    oracle = mean[None, :] + points @ components
    assert np.allclose(z, oracle, atol=1e-14)


def test_total_variance_degenerate_zero():
    decomp = make_decomposition(np.zeros((10, 1)), np.ones((1, 4)) / 2.0)
    from ratecast.forecasting import ScoreForecast
    fc = ScoreForecast(points=np.zeros((3, 1)), variances=np.zeros((3, 1)),
                       fits=(ar1_fit(0.1),))
    assert np.all(total_variance(decomp, fc) == 0.0)


def test_total_variance_direct_substitution():
    p = 4
    comp = np.full((1, p), 1.0 / np.sqrt(p))  # squared loadings 1/p
    c = 0.07
    decomp = make_decomposition(np.zeros((10, 1)), comp,
                                resid=np.full(p, c))
    from ratecast.forecasting import ScoreForecast
    h = np.arange(1.0, 6.0)
    fc = ScoreForecast(points=np.zeros((5, 1)), variances=h[:, None],
                       fits=(ar1_fit(0.1),))
    var = total_variance(decomp, fc)
    assert np.allclose(var, h[:, None] / p + c, atol=1e-14)


def test_total_variance_matches_simulated_forecast_errors():
    # Monte Carlo oracle: with known components, RW scores and iid noise,
    # the h-step error variance of the point forecast equals
    # h * s_beta^2 * phi_i^2 + v
    rng = np.random.default_rng(3)
    p, horizon, reps = 4, 4, 2000
    comp = rng.normal(size=(1, p))
    comp /= np.linalg.norm(comp)
    s_beta, v = 0.3, 0.02
    errors = np.zeros((reps, horizon, p))
    for r in range(reps):
        beta_path = np.cumsum(s_beta * rng.standard_normal(horizon))
        noise = np.sqrt(v) * rng.standard_normal((horizon, p))
        truth = beta_path[:, None] * comp + noise
        forecast = np.zeros((horizon, p))  # conditional mean from beta_n = 0
        errors[r] = truth - forecast
    empirical = errors.var(axis=0)
    h = np.arange(1, horizon + 1)
    formula = h[:, None] * s_beta ** 2 * comp ** 2 + v
    assert np.all(np.abs(empirical - formula) <= 0.25 * formula)


# ---------------------------------------------------------------------------
# prediction_interval
# ---------------------------------------------------------------------------

def test_zero_variance_interval_degenerates():
    z = np.array([[1.0, 2.0]])
    lo, hi = prediction_interval(z, np.zeros_like(z), 0.2)
    assert np.array_equal(lo, z) and np.array_equal(hi, z)


def test_standard_normal_quantile_80():
    lo, hi = prediction_interval(np.zeros(1), np.ones(1), 0.2)
    assert hi[0] == pytest.approx(1.281552, abs=1e-5)
    assert lo[0] == pytest.approx(-1.281552, abs=1e-5)


def test_standard_normal_quantile_95():
    lo, hi = prediction_interval(np.zeros(1), np.ones(1), 0.05)
    assert hi[0] == pytest.approx(1.959964, abs=1e-5)


def test_alpha_domain():
    with pytest.raises(ValueError):
        prediction_interval(np.zeros(1), np.ones(1), 0.0)
    with pytest.raises(ValueError):
        prediction_interval(np.zeros(1), np.ones(1), 1.0)


# ---------------------------------------------------------------------------
# back_transform
# ---------------------------------------------------------------------------

def test_log_scale_interval_maps_to_exp():
    fc = back_transform(np.array([[0.5]]), np.array([[0.0]]),
                        np.array([[1.0]]), 0.0, alpha=0.2)
    assert fc.rate_lower[0, 0] == pytest.approx(1.0)
    assert fc.rate_upper[0, 0] == pytest.approx(np.e)


def test_power_scale_point():
    fc = back_transform(np.array([[2.0]]), np.array([[2.0]]),
                        np.array([[2.0]]), 0.5)
    assert fc.rate_point[0, 0] == pytest.approx(4.0)


def test_lower_bound_clamped_and_flagged():
    # lam*z + 1 <= 0 on the lower bound: clamp to the floor, flag the cell
    fc = back_transform(np.array([[0.0]]), np.array([[-3.0]]),
                        np.array([[1.0]]), 0.5)
    assert fc.rate_lower[0, 0] == RATE_CLAMP_FLOOR
    assert bool(fc.clamped[0, 0])
    assert fc.rate_lower[0, 0] <= fc.rate_point[0, 0] <= fc.rate_upper[0, 0]


def test_order_preserved_without_clamping():
    rng = np.random.default_rng(4)
    z = rng.normal(size=(6, 5))
    lo, hi = z - 0.3, z + 0.3
    for lam in (0.0, 0.4, 1.0):
        if lam > 0:  # keep inside the domain
            shift = (-0.9 / lam - np.min(lo)) if lam * np.min(lo) + 1 <= 0 else 0.0
            z2, lo2, hi2 = z + shift, lo + shift, hi + shift
        else:
            z2, lo2, hi2 = z, lo, hi
        fc = back_transform(z2, lo2, hi2, lam)
        assert np.all(fc.rate_lower <= fc.rate_point)
        assert np.all(fc.rate_point <= fc.rate_upper)
        assert np.all(fc.rate_point > 0.0)


# ---------------------------------------------------------------------------
# SurfaceForecaster end to end
# ---------------------------------------------------------------------------

def test_estimator_params_clone_roundtrip():
    model = SurfaceForecaster(lmbda=0.4, alpha=0.1, n_components=2)
    params = model.get_params()
    assert params == {"lmbda": 0.4, "alpha": 0.1, "n_components": 2,
                      "k_max": None}
    assert clone(model).get_params() == params


def test_estimator_fit_predict_shapes(noisy_surface):
    model = SurfaceForecaster(lmbda=0.5).fit(noisy_surface)
    fc = model.predict(6)
    assert fc.rate_point.shape == (6, noisy_surface.n_ages)
    assert np.array_equal(fc.ages, noisy_surface.ages)
    assert np.all(fc.rate_lower <= fc.rate_point)
    assert np.all(fc.rate_point <= fc.rate_upper)
    assert np.all(fc.rate_point > 0.0)


def test_estimator_accepts_plain_matrix(noisy_surface):
    model = SurfaceForecaster(lmbda=0.5).fit(noisy_surface.rates)
    fc = model.predict(3)
    assert fc.rate_point.shape == (3, noisy_surface.n_ages)


def test_estimator_requires_fit_before_predict():
    with pytest.raises(RuntimeError, match="not fitted"):
        SurfaceForecaster(lmbda=0.5).predict(3)


def test_interval_width_nondecreasing_in_horizon(noisy_surface):
    model = SurfaceForecaster(lmbda=0.5).fit(noisy_surface)
    fc = model.predict(10)
    width = fc.z_upper - fc.z_lower
    assert np.all(np.diff(width, axis=0) >= -1e-12)


def test_noise_free_surface_forecast_reproduces_truth(noisefree_surface):
    # deterministic drift surface: 1-step (and further) forecasts should
    # reproduce the generative truth almost exactly
    fit_to = noisefree_surface.through_year(int(noisefree_surface.years[-4]))
    model = SurfaceForecaster(lmbda=0.5).fit(fit_to)
    fc = model.predict(3)
    actual = noisefree_surface.rates[-3:]
    assert np.max(np.abs(fc.rate_point - actual)) <= 1e-6


def test_forecast_scores_count_mismatch_rejected(noisy_surface):
    transformed = transform_surface(noisy_surface, 0.5)
    decomp = decompose(transformed)
    with pytest.raises(ValueError, match="fitted models"):
        forecast_scores(decomp, 3, fits=(ar1_fit(0.1), ar1_fit(0.2)))
