"""One-parameter Box-Cox power transform and its inverse.

The forward transform maps a strictly positive rate f to
``((f ** lam) - 1) / lam`` for lam != 0 and to ``log(f)`` at lam = 0; the
transformation parameter is restricted to the unit interval. Values of
``|lam| < 1e-10`` take the logarithm branch to avoid catastrophic
cancellation in the power branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .surface import AgeRateSurface

LOG_BRANCH_EPS = 1e-10


def validate_lambda(lam: float) -> float:
    """Check that the transformation parameter lies in [0, 1]."""
    lam = float(lam)
    if not np.isfinite(lam) or not 0.0 <= lam <= 1.0:
        raise ValueError(f"transformation parameter must lie in [0, 1], got {lam}")
    return lam


def box_cox(f, lam: float):
    """Box-Cox transform of positive rate(s) ``f``.

    Accepts a scalar or an ndarray; returns the same shape. Computed as
    ``expm1(lam * log(f)) / lam``, which stays accurate (and strictly
    monotone) down to tiny lam where the naive power form cancels
    catastrophically. Raises ``ValueError`` on non-positive input.
    """
    lam = validate_lambda(lam)
    arr = np.asarray(f, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("Box-Cox transform requires strictly positive finite input")
    if lam < LOG_BRANCH_EPS:
        out = np.log(arr)
    else:
        out = np.expm1(lam * np.log(arr)) / lam
    return float(out) if np.isscalar(f) else out


def inv_box_cox(z, lam: float):
    """Inverse Box-Cox transform.

    Maps z back to the rate scale: ``(lam*z + 1) ** (1/lam)`` for lam != 0,
    ``exp(z)`` at lam = 0. Raises ``ValueError`` where ``lam*z + 1 <= 0``
    (the inverse is undefined there); interval-bound clamping is a
    forecast-level policy, not handled here.
    """
    lam = validate_lambda(lam)
    arr = np.asarray(z, dtype=float)
    if lam < LOG_BRANCH_EPS:
        out = np.exp(arr)
    else:
        base = lam * arr + 1.0
        if np.any(base <= 0.0):
            bad = np.min(base)
            raise ValueError(
                f"inverse Box-Cox undefined: lam*z + 1 = {bad} <= 0 "
                f"(lam={lam})"
            )
        out = np.exp(np.log1p(lam * arr) / lam)
    return float(out) if np.isscalar(z) else out


@dataclass(frozen=True)
class TransformedSurface:
    """Box-Cox transformed surface: same axes as the source rate surface,
    values on the transformed scale, plus the parameter used."""

    years: np.ndarray
    ages: np.ndarray
    values: np.ndarray
    lam: float

    def __post_init__(self):
        if self.values.shape != (self.years.size, self.ages.size):
            raise ValueError("transformed values shape does not match axes")


def transform_surface(surface: AgeRateSurface, lam: float) -> TransformedSurface:
    """Apply the Box-Cox transform elementwise to a whole surface."""
    lam = validate_lambda(lam)
    values = box_cox(surface.rates, lam)
    return TransformedSurface(surface.years, surface.ages, values, lam)


class BoxCoxTransform(BaseEstimator, TransformerMixin):
    """Stateless Box-Cox transformer over 2-d arrays of positive rates.

    Exists so the transform composes with scikit-learn pipelines;
    ``fit`` only validates. ``lmbda`` must lie in [0, 1].
    """

    def __init__(self, lmbda: float = 0.0):
        self.lmbda = lmbda

    def fit(self, X, y=None):
        validate_lambda(self.lmbda)
        X = check_array(X, ensure_2d=False)
        if np.any(X <= 0.0):
            raise ValueError("BoxCoxTransform requires strictly positive input")
        self.n_features_in_ = X.shape[-1] if X.ndim > 1 else 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_2d=False)
        return box_cox(X, self.lmbda)

    def inverse_transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_2d=False)
        return inv_box_cox(X, self.lmbda)
