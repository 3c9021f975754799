"""Multi-step forecasts of a decomposed surface, with prediction
intervals, assembled on the transformed scale and mapped back to rates.

Point forecasts are mean + sum_k score_forecast_k * component_k; the
total variance stacks the score-forecast variances (weighted by squared
component loadings) on top of the per-age residual variance. Intervals
assume normality on the transformed scale. Because the inverse Box-Cox
is monotone, the back-transformed point forecast is a median (not mean)
forecast on the rate scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator

from . import arima
from .boxcox import LOG_BRANCH_EPS, transform_surface, validate_lambda
from .decomposition import SurfaceDecomposition, decompose
from .surface import AgeRateSurface

#: Rate bounds whose inverse transform is undefined (lam*z + 1 <= 0) or
#: underflows to zero are clamped here: the interval has reached the
#: natural boundary 0 of the rate scale.
RATE_CLAMP_FLOOR = 1e-10


@dataclass(frozen=True)
class ScoreForecast:
    """Per-component score forecasts: points and variances are
    (horizon x K); fits holds the ARIMA model behind each column."""

    points: np.ndarray
    variances: np.ndarray
    fits: tuple[arima.ArimaFit, ...]

    @property
    def horizon(self) -> int:
        return self.points.shape[0]

    @property
    def n_components(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class RateForecast:
    """Forecast surface over (horizon x age), on both scales.

    ``clamped`` marks cells where a rate bound hit the inverse-transform
    domain edge and was clamped to ``RATE_CLAMP_FLOOR``.
    """

    ages: np.ndarray
    lam: float
    alpha: float
    z_point: np.ndarray
    z_variance: np.ndarray
    z_lower: np.ndarray
    z_upper: np.ndarray
    rate_point: np.ndarray
    rate_lower: np.ndarray
    rate_upper: np.ndarray
    clamped: np.ndarray

    @property
    def horizon(self) -> int:
        return self.z_point.shape[0]


def forecast_scores(decomposition: SurfaceDecomposition, horizon: int,
                    fits: tuple[arima.ArimaFit, ...] | None = None
                    ) -> ScoreForecast:
    """Forecast each retained score series ``horizon`` steps ahead.

    Each component's ARIMA model comes from ``arima.auto_select`` unless
    pre-fitted models are supplied.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    k = decomposition.n_components
    if fits is None:
        fits = tuple(arima.auto_select(decomposition.scores[:, j])
                     for j in range(k))
    if len(fits) != k:
        raise ValueError(f"expected {k} fitted models, got {len(fits)}")
    points = np.empty((horizon, k))
    variances = np.empty((horizon, k))
    for j in range(k):
        pts, var = arima.forecast(fits[j], decomposition.scores[:, j], horizon)
        points[:, j] = pts
        variances[:, j] = var
    return ScoreForecast(points=points, variances=variances, fits=tuple(fits))


def point_forecast(decomposition: SurfaceDecomposition,
                   score_forecast: ScoreForecast) -> np.ndarray:
    """Transformed-scale point forecasts: mean curve plus the component
    expansion at the forecast scores. Shape (horizon x ages)."""
    if score_forecast.n_components != decomposition.n_components:
        raise ValueError("component count mismatch")
    return decomposition.mean + score_forecast.points @ decomposition.components


def total_variance(decomposition: SurfaceDecomposition,
                   score_forecast: ScoreForecast) -> np.ndarray:
    """Approximate forecast variance on the transformed scale:
    score-forecast variances through squared loadings, plus the per-age
    residual variance (constant across horizons)."""
    if score_forecast.n_components != decomposition.n_components:
        raise ValueError("component count mismatch")
    return (score_forecast.variances @ decomposition.components ** 2
            + decomposition.residual_variances)


def prediction_interval(z_point: np.ndarray, z_variance: np.ndarray,
                        alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Central (1-alpha) normal interval around the transformed-scale
    point forecast."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    z_point = np.asarray(z_point, dtype=float)
    z_variance = np.asarray(z_variance, dtype=float)
    if np.any(z_variance < 0.0):
        raise ValueError("variances must be nonnegative")
    margin = norm.ppf(1.0 - alpha / 2.0) * np.sqrt(z_variance)
    return z_point - margin, z_point + margin


def _inverse_with_clamp(z: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Inverse Box-Cox that clamps out-of-domain or underflowed cells to
    the rate floor, returning (rates, clamped mask)."""
    z = np.asarray(z, dtype=float)
    if lam < LOG_BRANCH_EPS:
        rates = np.exp(z)
    else:
        base = lam * z + 1.0
        rates = np.where(base > 0.0, base, 1.0) ** (1.0 / lam)
        rates = np.where(base > 0.0, rates, 0.0)
    clamped = rates <= 0.0
    rates = np.where(clamped, RATE_CLAMP_FLOOR, rates)
    return rates, clamped


def back_transform(z_point: np.ndarray, z_lower: np.ndarray,
                   z_upper: np.ndarray, lam: float, *,
                   ages: np.ndarray | None = None,
                   alpha: float = 0.2,
                   z_variance: np.ndarray | None = None) -> RateForecast:
    """Map transformed-scale forecasts and bounds to the rate scale.

    The inverse transform is monotone, so interval endpoints map to
    interval endpoints and ordering is preserved. Cells with
    ``lam*z + 1 <= 0`` (possible for lower bounds of wide intervals) are
    clamped to ``RATE_CLAMP_FLOOR`` and flagged.
    """
    lam = validate_lambda(lam)
    z_point = np.asarray(z_point, dtype=float)
    z_lower = np.asarray(z_lower, dtype=float)
    z_upper = np.asarray(z_upper, dtype=float)
    if not z_point.shape == z_lower.shape == z_upper.shape:
        raise ValueError("forecast matrices must share one shape")
    if ages is None:
        ages = np.arange(z_point.shape[-1])
    if z_variance is None:
        z_variance = np.zeros_like(z_point)
    rate_point, c1 = _inverse_with_clamp(z_point, lam)
    rate_lower, c2 = _inverse_with_clamp(z_lower, lam)
    rate_upper, c3 = _inverse_with_clamp(z_upper, lam)
    return RateForecast(
        ages=np.asarray(ages), lam=lam, alpha=alpha,
        z_point=z_point, z_variance=np.asarray(z_variance, dtype=float),
        z_lower=z_lower, z_upper=z_upper,
        rate_point=rate_point, rate_lower=rate_lower, rate_upper=rate_upper,
        clamped=c1 | c2 | c3,
    )


class SurfaceForecaster(BaseEstimator):
    """End-to-end forecaster for age-by-year rate surfaces.

    fit(): Box-Cox transform, principal-component decomposition (K by
    the eigenvalue-ratio rule unless ``n_components`` is forced), and an
    automatically selected ARIMA model per score series.
    predict(horizon): point forecasts plus central (1-alpha) intervals,
    back-transformed to the rate scale.

    Parameters
    ----------
    lmbda : float in [0, 1]
        Box-Cox transformation parameter.
    alpha : float in (0, 1)
        Significance level of the prediction intervals (0.2 gives 80%).
    n_components : int, optional
        Force the number of retained components.
    k_max : int, optional
        Search bound for the component-count selection rule.
    """

    def __init__(self, lmbda: float = 0.0, alpha: float = 0.2,
                 n_components: int | None = None, k_max: int | None = None):
        self.lmbda = lmbda
        self.alpha = alpha
        self.n_components = n_components
        self.k_max = k_max

    def fit(self, X, y=None):
        validate_lambda(self.lmbda)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if isinstance(X, AgeRateSurface):
            surface = X
        else:
            X = np.asarray(X, dtype=float)
            if X.ndim != 2:
                raise ValueError("expected an AgeRateSurface or a 2-d "
                                 "(years x ages) array")
            surface = AgeRateSurface(np.arange(X.shape[0]),
                                     np.arange(X.shape[1]), X)
        transformed = transform_surface(surface, self.lmbda)
        self.decomposition_ = decompose(transformed, self.n_components,
                                        self.k_max)
        self.score_fits_ = tuple(
            arima.auto_select(self.decomposition_.scores[:, j])
            for j in range(self.decomposition_.n_components)
        )
        self.years_ = surface.years
        self.ages_ = surface.ages
        self.n_features_in_ = surface.n_ages
        return self

    def predict(self, horizon: int) -> RateForecast:
        if not hasattr(self, "decomposition_"):
            raise RuntimeError("SurfaceForecaster is not fitted yet")
        score_fc = forecast_scores(self.decomposition_, horizon,
                                   self.score_fits_)
        z_hat = point_forecast(self.decomposition_, score_fc)
        z_var = total_variance(self.decomposition_, score_fc)
        z_lo, z_hi = prediction_interval(z_hat, z_var, self.alpha)
        return back_transform(z_hat, z_lo, z_hi, self.lmbda, ages=self.ages_,
                              alpha=self.alpha, z_variance=z_var)
