"""Forecast-accuracy measures and the rolling-origin evaluation harness.

Point accuracy is the mean absolute forecast error (MAFE) pooled over
forecast origins and ages at a fixed horizon. Interval accuracy is the
averaged interval score

    S_alpha(l, u; x) = (u - l) + (2/alpha) * [(l - x) 1{x < l} + (x - u) 1{x > u}]

computed on the original rate scale. The rolling-origin harness refits
the full pipeline (transform, decomposition, component count, ARIMA
orders) at every origin of an expanding window; a span of M evaluation
years yields M - h + 1 pooled forecasts per age at horizon h.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError
from .forecasting import SurfaceForecaster
from .surface import AgeRateSurface

logger = logging.getLogger(__name__)


def interval_score(lower, upper, observed, alpha: float):
    """Interval score of central (1-alpha) interval forecasts.

    Vectorized over arrays of matching shape; lower wins are impossible:
    the score is at least the interval width, with equality exactly when
    the observation is covered.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    l = np.asarray(lower, dtype=float)
    u = np.asarray(upper, dtype=float)
    x = np.asarray(observed, dtype=float)
    if np.any(l > u):
        raise ValueError("lower bound exceeds upper bound")
    score = (u - l) + (2.0 / alpha) * (np.clip(l - x, 0.0, None)
                                       + np.clip(x - u, 0.0, None))
    if score.ndim == 0:
        return float(score)
    return score


def mafe(actual, predicted) -> float:
    """Mean absolute forecast error over all supplied cells."""
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise ValueError("no cells to average")
    return float(np.mean(np.abs(a - p)))


def averaged_interval_score(lower, upper, observed, alpha: float) -> float:
    """Arithmetic mean of per-cell interval scores."""
    scores = np.asarray(interval_score(lower, upper, observed, alpha))
    if scores.size == 0:
        raise ValueError("no cells to average")
    return float(np.mean(scores))


@dataclass(frozen=True)
class HorizonErrorTable:
    """Per-horizon MAFE and averaged interval score, in rate units.

    ``origins_per_horizon`` counts the forecast origins pooled at each
    horizon (the number of forecasts per age): a span of M evaluation
    years gives M - h + 1 at horizon h.
    """

    horizons: np.ndarray
    mafe: np.ndarray
    interval_score: np.ndarray
    origins_per_horizon: np.ndarray

    def __post_init__(self):
        if not (self.horizons.size == self.mafe.size
                == self.interval_score.size
                == self.origins_per_horizon.size):
            raise ValueError("column lengths differ")

    @property
    def mean_mafe(self) -> float:
        return float(np.mean(self.mafe))

    @property
    def median_mafe(self) -> float:
        return float(np.median(self.mafe))

    @property
    def mean_interval_score(self) -> float:
        return float(np.mean(self.interval_score))

    @property
    def median_interval_score(self) -> float:
        return float(np.median(self.interval_score))


def rolling_origin(surface: AgeRateSurface, lmbda: float,
                   fit_end_year: int, eval_end_year: int,
                   alpha: float = 0.2,
                   n_components: int | None = None,
                   k_max: int | None = None) -> HorizonErrorTable:
    """Expanding-window evaluation with per-horizon pooling.

    For each origin o in fit_end_year .. eval_end_year - 1 the full
    pipeline is refit on years <= o and forecasts horizons
    1 .. eval_end_year - o; absolute errors and interval scores (both on
    the rate scale) are pooled per horizon across origins and ages.

    Raises
    ------
    NumericalError
        A pipeline failure at any origin, with the origin year attached.
    """
    first, last = int(surface.years[0]), int(surface.years[-1])
    if not first <= fit_end_year < eval_end_year <= last:
        raise ValueError(
            f"need {first} <= fit_end_year < eval_end_year <= {last}, got "
            f"fit_end_year={fit_end_year}, eval_end_year={eval_end_year}"
        )
    span = int(eval_end_year - fit_end_year)
    abs_errors: list[list[np.ndarray]] = [[] for _ in range(span)]
    scores: list[list[np.ndarray]] = [[] for _ in range(span)]

    for origin in range(int(fit_end_year), int(eval_end_year)):
        h_max = int(eval_end_year) - origin
        try:
            model = SurfaceForecaster(lmbda=lmbda, alpha=alpha,
                                      n_components=n_components,
                                      k_max=k_max)
            model.fit(surface.through_year(origin))
            fc = model.predict(h_max)
        except (ValueError, NumericalError) as exc:
            raise NumericalError(
                f"pipeline failed at rolling origin {origin}: {exc}"
            ) from exc
        if logger.isEnabledFor(logging.INFO):
            specs = ", ".join(
                f"({f.spec.p},{f.spec.d},{f.spec.q}"
                + ("+drift)" if f.spec.drift else ")")
                for f in model.score_fits_
            )
            logger.info("origin %d: K=%d, arima %s", origin,
                        model.decomposition_.n_components, specs)
        actual = surface.rates_for_years(range(origin + 1,
                                               origin + h_max + 1))
        for h in range(1, h_max + 1):
            abs_errors[h - 1].append(np.abs(actual[h - 1]
                                            - fc.rate_point[h - 1]))
            scores[h - 1].append(
                np.asarray(interval_score(fc.rate_lower[h - 1],
                                          fc.rate_upper[h - 1],
                                          actual[h - 1], alpha))
            )

    mafe_col = np.array([float(np.mean(np.concatenate(pool)))
                         for pool in abs_errors])
    score_col = np.array([float(np.mean(np.concatenate(pool)))
                          for pool in scores])
    counts = np.array([len(pool) for pool in abs_errors])
    return HorizonErrorTable(horizons=np.arange(1, span + 1),
                             mafe=mafe_col, interval_score=score_col,
                             origins_per_horizon=counts)
