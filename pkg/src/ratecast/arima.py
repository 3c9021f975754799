"""Univariate ARIMA fitting, order selection and forecasting.

Estimation follows the classical route: conditional-sum-of-squares
starting values refined by full Gaussian maximum likelihood through a
state-space (Kalman) recursion, with stationarity and invertibility
enforced by optimizing in a partial-autocorrelation-transformed space.
Orders are selected by a stepwise search over (p, q, drift) minimizing
the corrected AIC, after choosing the differencing order d with
successive KPSS level-stationarity tests. Seasonal terms are out of
scope (annual data).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._filters import arma_kalman, nelder_mead, pacf_to_coeffs
from .exceptions import NumericalError

MAX_P = 5
MAX_D = 2
MAX_Q = 5

#: 5% critical value of the KPSS level-stationarity statistic.
KPSS_CRIT_5PCT = 0.463

#: AICc ties closer than this prefer the smaller model.
AICC_TIE_EPS = 1e-8

#: Stepwise-search candidates whose AR or MA roots come within 1% of the
#: unit circle are rejected; near-cancelling root pairs on short series
#: otherwise win AICc with spuriously inflated likelihoods.
SEARCH_ROOT_MARGIN = 1.01

#: Mixed candidates with an AR root this close to an MA root are
#: rejected as unidentified: the factors nearly cancel, so the fit is a
#: re-parameterized lower-order model riding a likelihood ridge.
ROOT_CANCEL_TOL = 0.15

_NM_MAXITER = 500
_NM_RELTOL = 1e-9
_ROOT_TOL = 1e-6


@dataclass(frozen=True)
class ArimaSpec:
    """Model orders (p, d, q) plus a drift flag.

    ``drift`` means the d-times differenced series has a freely estimated
    mean; it is only permitted for d <= 1.
    """

    p: int
    d: int
    q: int
    drift: bool = False

    def __post_init__(self):
        if not (0 <= self.p <= MAX_P and 0 <= self.d <= MAX_D
                and 0 <= self.q <= MAX_Q):
            raise ValueError(
                f"orders out of range (p<={MAX_P}, d<={MAX_D}, q<={MAX_Q}): "
                f"({self.p},{self.d},{self.q})"
            )
        if self.drift and self.d > 1:
            raise ValueError("drift is only allowed for d <= 1")

    @property
    def n_params(self) -> int:
        """Estimated parameter count m = p + q + drift + 1 (with sigma2)."""
        return self.p + self.q + int(self.drift) + 1


@dataclass(frozen=True)
class ArimaFit:
    """A fitted ARIMA model: coefficients, innovation variance and the
    information-criterion bookkeeping used by the order search."""

    spec: ArimaSpec
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    drift_coeff: float
    sigma2: float
    loglik: float
    aicc: float
    n_effective: int


def difference(series: np.ndarray, d: int) -> np.ndarray:
    """d-fold first differences; length shrinks by d."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if d < 0:
        raise ValueError("d must be nonnegative")
    if series.size <= d:
        raise ValueError(f"series of length {series.size} too short for d={d}")
    out = series
    for _ in range(d):
        out = np.diff(out)
    return out


def _min_root_modulus(coeffs: np.ndarray, sign: float) -> float:
    """Smallest root modulus of 1 + sign * (c_1 z + ... + c_k z^k)."""
    if coeffs.size == 0:
        return np.inf
    poly = np.concatenate(([1.0], sign * coeffs))[::-1]
    roots = np.roots(poly)
    if roots.size == 0:
        return np.inf
    return float(np.min(np.abs(roots)))


def _check_roots(ar: np.ndarray, ma: np.ndarray) -> None:
    if _min_root_modulus(ar, -1.0) <= 1.0 - _ROOT_TOL:
        raise NumericalError("fitted AR polynomial has a root inside the unit "
                             "circle (non-stationary optimum)")
    if _min_root_modulus(ma, +1.0) <= 1.0 - _ROOT_TOL:
        raise NumericalError("fitted MA polynomial has a root inside the unit "
                             "circle (non-invertible optimum)")


def _aicc(loglik: float, m: int, n_eff: int) -> float:
    return -2.0 * loglik + 2.0 * m * (n_eff / (n_eff - m - 1.0))


def fit(series: np.ndarray, spec: ArimaSpec) -> ArimaFit:
    """Maximum-likelihood fit of the given ARIMA specification.

    The differenced (and drift-adjusted) series is fitted by
    conditional-sum-of-squares starting values refined by full Gaussian
    likelihood; deterministic given (series, spec).

    Raises
    ------
    ValueError
        Series too short for the spec.
    NumericalError
        Optimizer failed to converge within the iteration cap, or the
        optimum is non-stationary / non-invertible.
    """
    series = np.asarray(series, dtype=float)
    w = difference(series, spec.d)
    n_eff = w.size
    n_free = spec.p + spec.q + int(spec.drift)
    if n_eff < n_free + 5:
        raise ValueError(
            f"differenced series of length {n_eff} too short for "
            f"ARIMA({spec.p},{spec.d},{spec.q})"
            + ("+drift" if spec.drift else "")
        )

    p, q, drift = spec.p, spec.q, spec.drift
    if p + q == 0:
        # closed form: mean (when drift) and variance of the differenced series
        mu = float(np.mean(w)) if drift else 0.0
        resid = w - mu
        sigma2 = float(np.mean(resid * resid))
        sigma2 = max(sigma2, float(np.finfo(float).tiny))
        loglik = -0.5 * n_eff * (math.log(2.0 * math.pi) + 1.0 + math.log(sigma2))
        ar = np.empty(0)
        ma = np.empty(0)
    else:
        x0 = np.zeros(n_free)
        if drift:
            x0[-1] = np.mean(w)
        x_css, _, _ = nelder_mead(w, p, q, drift, x0, True,
                                  100 * (p + q + 1), 1e-6)
        starts = [x_css]
        if p > 0 and q > 0:
            # AR/MA near-cancellation can trap the CSS start on a ridge
            starts.append(x0)
        best_x = None
        best_f = np.inf
        for start in starts:
            x_opt, f_opt, converged = nelder_mead(w, p, q, drift, start, False,
                                                  _NM_MAXITER, _NM_RELTOL)
            if converged and np.isfinite(f_opt) and f_opt < best_f:
                best_x, best_f = x_opt, f_opt
        if best_x is None:
            raise NumericalError(
                f"ARIMA({p},{spec.d},{q}) likelihood optimization did not "
                f"converge within {_NM_MAXITER} iterations"
            )
        ar = pacf_to_coeffs(best_x[:p]) if p else np.empty(0)
        ma = -pacf_to_coeffs(best_x[p:p + q]) if q else np.empty(0)
        mu = float(best_x[p + q]) if drift else 0.0
        loglik, sigma2, _ = arma_kalman(w - mu, ar, ma)
        if not np.isfinite(loglik):
            raise NumericalError("likelihood not finite at reported optimum")
        _check_roots(ar, ma)

    aicc = _aicc(loglik, spec.n_params, n_eff)
    if not np.isfinite(aicc):
        raise NumericalError("AICc not finite (series too short for the spec)")
    ar.setflags(write=False)
    ma.setflags(write=False)
    return ArimaFit(spec=spec, ar_coeffs=ar, ma_coeffs=ma, drift_coeff=mu,
                    sigma2=float(sigma2), loglik=float(loglik),
                    aicc=float(aicc), n_effective=int(n_eff))


def kpss_statistic(series: np.ndarray, nlags: int | None = None) -> float:
    """KPSS level-stationarity statistic with a Bartlett-window long-run
    variance; default lag truncation floor(3 sqrt(n) / 13).

    A (numerically) constant series scores 0, i.e. stationary.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2:
        return 0.0
    e = x - x.mean()
    scale = np.max(np.abs(x)) + 1.0
    if np.max(np.abs(e)) <= 1e-12 * scale:
        return 0.0
    if nlags is None:
        nlags = int(3.0 * math.sqrt(n) / 13.0)
    s2 = float(e @ e) / n
    for j in range(1, nlags + 1):
        w_j = 1.0 - j / (nlags + 1.0)
        s2 += 2.0 * w_j * float(e[j:] @ e[:-j]) / n
    if s2 <= 0.0:
        return 0.0
    partial_sums = np.cumsum(e)
    eta = float(partial_sums @ partial_sums) / (n * n)
    return eta / s2


def choose_diff_order(series: np.ndarray, max_d: int = MAX_D) -> int:
    """Smallest d in 0..max_d whose d-times differenced series passes the
    KPSS test at the 5% level; capped at max_d otherwise."""
    x = np.asarray(series, dtype=float)
    for d in range(max_d + 1):
        if kpss_statistic(x) <= KPSS_CRIT_5PCT:
            return d
        if x.size < 2:
            return d
        x = np.diff(x)
    return max_d


def _roots(coeffs: np.ndarray, sign: float) -> np.ndarray:
    if coeffs.size == 0:
        return np.empty(0, dtype=complex)
    return np.roots(np.concatenate(([1.0], sign * coeffs))[::-1])


def _has_cancelling_factors(fitted: ArimaFit) -> bool:
    if fitted.spec.p == 0 or fitted.spec.q == 0:
        return False
    ar_roots = _roots(fitted.ar_coeffs, -1.0)
    ma_roots = _roots(fitted.ma_coeffs, 1.0)
    dist = np.abs(ar_roots[:, None] - ma_roots[None, :])
    return bool(np.min(dist) < ROOT_CANCEL_TOL)


def _better(a: ArimaFit, b: ArimaFit | None) -> bool:
    """Whether fit a beats fit b on AICc, breaking near-ties in favor of
    fewer parameters, then lower p, then lower q, then no drift."""
    if b is None:
        return True
    if a.aicc < b.aicc - AICC_TIE_EPS:
        return True
    if a.aicc > b.aicc + AICC_TIE_EPS:
        return False
    key_a = (a.spec.n_params, a.spec.p, a.spec.q, int(a.spec.drift))
    key_b = (b.spec.n_params, b.spec.p, b.spec.q, int(b.spec.drift))
    return key_a < key_b


def auto_select(series: np.ndarray) -> ArimaFit:
    """Automatic ARIMA order selection.

    d comes from successive KPSS tests; (p, q, drift) from a stepwise
    AICc search seeded at (0,0), (1,0), (0,1) and (2,2) that repeatedly
    moves to the best-scoring neighbor (p or q changed by one, both
    changed together, or drift toggled) until no neighbor improves.
    Candidates that fail to converge are discarded; if nothing converges
    the fallback is ARIMA(0,d,0).
    """
    series = np.asarray(series, dtype=float)
    if series.size < 10:
        raise ValueError(f"need at least 10 observations, got {series.size}")
    d = choose_diff_order(series)
    n_eff = series.size - d
    allow_drift = d <= 1
    max_pq = 1 if n_eff < 10 else MAX_P + MAX_Q

    cache: dict[tuple[int, int, bool], ArimaFit | None] = {}

    def evaluate(p: int, q: int, drift: bool) -> ArimaFit | None:
        key = (p, q, drift)
        if key in cache:
            return cache[key]
        result = None
        if (0 <= p <= MAX_P and 0 <= q <= MAX_Q and p + q <= max_pq
                and n_eff >= p + q + int(drift) + 5
                and n_eff - (p + q + int(drift) + 1) - 1 > 0):
            try:
                result = fit(series, ArimaSpec(p, d, q, drift))
            except (NumericalError, ValueError):
                result = None
        if result is not None and (
                _min_root_modulus(result.ar_coeffs, -1.0) < SEARCH_ROOT_MARGIN
                or _min_root_modulus(result.ma_coeffs, 1.0) < SEARCH_ROOT_MARGIN
                or _has_cancelling_factors(result)):
            result = None
        cache[key] = result
        return result

    best: ArimaFit | None = None
    for p0, q0 in ((0, 0), (1, 0), (0, 1), (2, 2)):
        cand = evaluate(p0, q0, allow_drift)
        if cand is not None and _better(cand, best):
            best = cand

    if best is not None:
        improved = True
        while improved:
            improved = False
            p, q = best.spec.p, best.spec.q
            drift = best.spec.drift
            neighbors = [(p - 1, q, drift), (p + 1, q, drift),
                         (p, q - 1, drift), (p, q + 1, drift),
                         (p - 1, q - 1, drift), (p + 1, q + 1, drift)]
            if allow_drift:
                neighbors.append((p, q, not drift))
            for cp, cq, cdrift in neighbors:
                if cp < 0 or cq < 0:
                    continue
                cand = evaluate(cp, cq, cdrift)
                if cand is not None and _better(cand, best):
                    best = cand
                    improved = True

    if best is None:
        best = fit(series, ArimaSpec(0, d, 0, False))
    return best


def _psi_weights(spec: ArimaSpec, ar: np.ndarray, ma: np.ndarray,
                 horizon: int) -> np.ndarray:
    """First ``horizon`` MA(infinity) weights of the integrated model,
    i.e. of theta(B) / (phi(B) (1-B)^d)."""
    # coefficients of phi(B)(1-B)^d written as 1 - sum Phi_i B^i
    poly = np.concatenate(([1.0], -ar))
    for _ in range(spec.d):
        poly = np.convolve(poly, [1.0, -1.0])
    big_phi = -poly[1:]
    psi = np.zeros(horizon)
    for j in range(horizon):
        val = 1.0 if j == 0 else 0.0
        if 1 <= j <= ma.size:
            val += ma[j - 1]
        for i in range(1, min(j, big_phi.size) + 1):
            val += big_phi[i - 1] * psi[j - i]
        psi[j] = val
    return psi


def forecast(fitted: ArimaFit, series: np.ndarray, horizon: int
             ) -> tuple[np.ndarray, np.ndarray]:
    """h-step-ahead point forecasts and forecast variances, h = 1..horizon.

    Points are conditional means obtained by iterating the state
    recursion past the sample; variances come from the MA(infinity)
    expansion of the integrated model,
    var_h = sigma2 * sum_{j<h} psi_j^2, which is nondecreasing in h.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    series = np.asarray(series, dtype=float)
    spec = fitted.spec
    w = difference(series, spec.d)
    ar = np.asarray(fitted.ar_coeffs, dtype=float)
    ma = np.asarray(fitted.ma_coeffs, dtype=float)

    ll, _, state = arma_kalman(w - fitted.drift_coeff, ar, ma)
    if not np.isfinite(ll):
        raise NumericalError("state filter failed at the fitted parameters")

    r = state.size
    phir = np.zeros(r)
    phir[:ar.size] = ar
    w_fc = np.empty(horizon)
    a = state.copy()
    for h in range(horizon):
        w_fc[h] = a[0]
        nxt = np.empty(r)
        for i in range(r):
            nxt[i] = phir[i] * a[0] + (a[i + 1] if i + 1 < r else 0.0)
        a = nxt
    w_fc += fitted.drift_coeff

    # integrate d times, seeding each level with its last observed value
    points = w_fc
    for level in range(spec.d):
        last = difference(series, spec.d - 1 - level)[-1]
        points = last + np.cumsum(points)

    psi = _psi_weights(spec, ar, ma, horizon)
    variances = fitted.sigma2 * np.cumsum(psi * psi)
    return points, variances
