"""Principal-component decomposition of transformed surfaces.

A transformed surface z (years x ages) is split into a per-age mean
curve, K orthonormal age components and their year-indexed score series,
via SVD of the centered matrix. K is chosen by the eigenvalue-ratio
rule: the k minimizing sigma_{k+1}^2 / sigma_k^2 over 1 <= k <= k_max.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxcox import TransformedSurface
from .exceptions import NumericalError


def center(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a (years x ages) matrix into its per-age mean and the
    centered matrix whose columns sum to zero."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("expected a 2-d (years x ages) matrix")
    if values.shape[0] < 2:
        raise ValueError("need at least 2 years to center")
    mean = values.mean(axis=0)
    return mean, values - mean


def svd_decompose(centered: np.ndarray, k_max: int | None = None
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of a centered matrix.

    Returns ``(components, scores, singular_values)`` where components
    (k_max x ages) are right singular vectors, scores (years x k_max) are
    left singular vectors scaled by the singular values, and all
    min(n, p) singular values are returned in nonincreasing order.

    Sign convention: each component is flipped so its entry of largest
    absolute value is positive, with the matching score series flipped to
    compensate, making outputs deterministic.
    """
    centered = np.asarray(centered, dtype=float)
    n, p = centered.shape
    rank_bound = min(n, p)
    if k_max is None:
        k_max = rank_bound
    if not 1 <= k_max <= rank_bound:
        raise ValueError(f"k_max must be in [1, {rank_bound}], got {k_max}")
    try:
        u, s, vt = np.linalg.svd(centered, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc
    components = vt[:k_max]
    scores = u[:, :k_max] * s[:k_max]
    for k in range(k_max):
        pivot = np.argmax(np.abs(components[k]))
        if components[k, pivot] < 0.0:
            components[k] = -components[k]
            scores[:, k] = -scores[:, k]
    return components, scores, s


def select_k(singular_values: np.ndarray, k_max: int | None = None) -> int:
    """Number of components to retain, by the eigenvalue-ratio rule.

    K = argmin over 1 <= k <= k_max of sigma_{k+1}^2 / sigma_k^2, with
    zero-denominator ratios treated as +inf and k_max defaulting to
    floor(len(singular_values) / 2). Always returns K >= 1.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.ndim != 1 or s.size < 1:
        raise ValueError("singular_values must be a nonempty vector")
    if np.any(s < 0) or np.any(np.diff(s) > 1e-12 * max(1.0, s[0])):
        raise ValueError("singular values must be nonnegative and nonincreasing")
    if np.all(s == 0.0):
        raise NumericalError("all singular values are zero; nothing to retain")
    if k_max is None:
        k_max = s.size // 2
    k_max = max(1, min(int(k_max), s.size - 1))
    ev = s ** 2
    ratios = np.full(k_max, np.inf)
    for k in range(1, k_max + 1):
        if ev[k - 1] > 0.0:
            ratios[k - 1] = ev[k] / ev[k - 1]
    return int(np.argmin(ratios)) + 1


def residual_variance(centered: np.ndarray, components: np.ndarray,
                      scores: np.ndarray) -> np.ndarray:
    """Per-age sample variance (divisor n-1) of the reconstruction
    residuals after truncating to the given components and scores.
    Held constant across forecast horizons."""
    centered = np.asarray(centered, dtype=float)
    residuals = centered - scores @ components
    return residuals.var(axis=0, ddof=1)


@dataclass(frozen=True)
class SurfaceDecomposition:
    """Mean curve, retained components/scores and residual variances of a
    transformed surface; the fitted state of the principal-component
    model."""

    years: np.ndarray
    ages: np.ndarray
    mean: np.ndarray
    components: np.ndarray        # (K, n_ages)
    scores: np.ndarray            # (n_years, K)
    singular_values: np.ndarray   # all min(n, p) values
    residual_variances: np.ndarray  # per age
    lam: float

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Mean plus truncated component expansion (no residuals)."""
        return self.mean + self.scores @ self.components


def decompose(transformed: TransformedSurface,
              n_components: int | None = None,
              k_max: int | None = None) -> SurfaceDecomposition:
    """Fit the principal-component model to a transformed surface.

    ``n_components`` forces K; otherwise K comes from ``select_k`` with
    the given (or default) ``k_max`` search bound.
    """
    mean, centered = center(transformed.values)
    n, p = centered.shape
    if np.all(centered == 0.0):
        # degenerate constant surface: one forced all-zero component
        return SurfaceDecomposition(
            years=transformed.years, ages=transformed.ages, mean=mean,
            components=np.zeros((1, p)), scores=np.zeros((n, 1)),
            singular_values=np.zeros(min(n, p)),
            residual_variances=np.zeros(p), lam=transformed.lam,
        )
    components, scores, svals = svd_decompose(centered)
    if n_components is None:
        n_components = select_k(svals, k_max)
    rank_bound = min(centered.shape)
    if not 1 <= n_components <= rank_bound:
        raise ValueError(f"n_components must be in [1, {rank_bound}]")
    components = components[:n_components]
    scores = scores[:, :n_components]
    resid = residual_variance(centered, components, scores)
    return SurfaceDecomposition(
        years=transformed.years,
        ages=transformed.ages,
        mean=mean,
        components=components,
        scores=scores,
        singular_values=svals,
        residual_variances=resid,
        lam=transformed.lam,
    )
