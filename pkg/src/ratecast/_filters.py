"""Numba kernels for ARMA Gaussian likelihood and its optimizer.

The likelihood uses the Harvey state-space form of a zero-mean causal
ARMA(p,q) with exact stationary initialization; the innovation variance
is concentrated out, so the filter runs with unit variance and
sigma2_hat = (1/n) sum v_t^2 / F_t. The Kalman loop is written with
explicit scalar loops over a state of dimension r = max(p, q+1) to avoid
per-step array allocation; the whole model fit (Nelder-Mead simplex over
partial-autocorrelation-transformed parameters) stays inside numba, so a
single fit costs well under a millisecond for the model orders searched.
"""

import numpy as np
from numba import njit

_LOG_2PI = np.log(2.0 * np.pi)
_SIGMA2_FLOOR = np.finfo(np.float64).tiny


@njit(cache=True)
def pacf_to_coeffs(x):
    """Monahan transform: unconstrained vector -> stationary AR coefficients.

    tanh maps each entry into (-1, 1) as a partial autocorrelation; the
    Durbin-Levinson recursion then yields coefficients of a polynomial
    1 - a_1 z - ... - a_p z^p with all roots outside the unit circle.
    The argument is clipped to +-10 so saturated parameters stay a
    computable distance from the boundary instead of walling the
    likelihood at -inf.
    """
    p = x.shape[0]
    phi = np.tanh(np.minimum(np.maximum(x, -10.0), 10.0))
    work = phi.copy()
    for j in range(1, p):
        a = phi[j]
        for k in range(j):
            work[k] -= a * phi[j - k - 1]
        for k in range(j):
            phi[k] = work[k]
    return phi


@njit(cache=True)
def arma_kalman(w, phi, theta):
    """Concentrated Gaussian log-likelihood of a zero-mean ARMA(p,q).

    Returns ``(loglik, sigma2, a_pred)`` where ``a_pred`` is the
    one-step-ahead predicted state vector after the last observation
    (the seed for multi-step forecasting). On numerically invalid
    parameters returns ``(-inf, 1.0, zeros)``.
    """
    n = w.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    r = max(p, q + 1)

    phir = np.zeros(r)
    for i in range(p):
        phir[i] = phi[i]
    rv = np.zeros(r)
    rv[0] = 1.0
    for j in range(q):
        rv[j + 1] = theta[j]

    # stationary covariance: P = T P T' + rv rv', T the companion matrix
    P = np.empty((r, r))
    if r == 1:
        denom = 1.0 - phir[0] * phir[0]
        if denom <= 1e-12:
            return -np.inf, 1.0, np.zeros(r)
        P[0, 0] = 1.0 / denom
    else:
        rr = r * r
        A = np.zeros((rr, rr))
        b = np.empty(rr)
        for i in range(r):
            for j in range(r):
                row = i * r + j
                b[row] = rv[i] * rv[j]
                for k in range(r):
                    tik = (phir[i] if k == 0 else 0.0) + (1.0 if k == i + 1 else 0.0)
                    if tik == 0.0:
                        continue
                    for l in range(r):
                        tjl = (phir[j] if l == 0 else 0.0) + (1.0 if l == j + 1 else 0.0)
                        if tjl != 0.0:
                            A[row, k * r + l] -= tik * tjl
                A[row, row] += 1.0
        vecP = np.linalg.solve(A, b)
        ok = True
        for v in vecP:
            if not np.isfinite(v):
                ok = False
                break
        if not ok:
            return -np.inf, 1.0, np.zeros(r)
        for i in range(r):
            for j in range(r):
                P[i, j] = vecP[i * r + j]

    a = np.zeros(r)
    upd = np.empty(r)
    M = np.empty((r, r))
    ssq = 0.0
    sumlogF = 0.0
    for t in range(n):
        v = w[t] - a[0]
        F = P[0, 0]
        if F <= 0.0 or not np.isfinite(F):
            return -np.inf, 1.0, np.zeros(r)
        ssq += v * v / F
        sumlogF += np.log(F)
        # measurement update: a + P[:,0] v / F
        g = v / F
        for i in range(r):
            upd[i] = a[i] + P[i, 0] * g
        # time update of the state: a <- T upd
        a0 = upd[0]
        for i in range(r):
            nxt = upd[i + 1] if i + 1 < r else 0.0
            a[i] = phir[i] * a0 + nxt
        # covariance update: M = P - P[:,0] P[0,:] / F
        c = 1.0 / F
        for i in range(r):
            pi0 = P[i, 0] * c
            for j in range(r):
                M[i, j] = P[i, j] - pi0 * P[0, j]
        # P <- T M T' + rv rv', exploiting the companion structure of T.
        # First Q = T M, stored transposed into P as scratch: P[j,i] = Q[i,j].
        for i in range(r):
            for j in range(r):
                nxt = M[i + 1, j] if i + 1 < r else 0.0
                P[j, i] = phir[i] * M[0, j] + nxt
        for i in range(r):
            qi0 = P[0, i]
            for j in range(r):
                qij1 = P[j + 1, i] if j + 1 < r else 0.0
                M[i, j] = phir[j] * qi0 + qij1
        for i in range(r):
            for j in range(r):
                P[i, j] = M[i, j] + rv[i] * rv[j]

    sigma2 = ssq / n
    if sigma2 < _SIGMA2_FLOOR:
        sigma2 = _SIGMA2_FLOOR
    ll = -0.5 * n * (_LOG_2PI + 1.0 + np.log(sigma2)) - 0.5 * sumlogF
    return ll, sigma2, a


@njit(cache=True)
def _objective(x, w, p, q, drift, use_css):
    """Negative objective at unconstrained parameter vector x.

    Layout of x: p AR entries, q MA entries (both in transformed space),
    then the drift/mean term when present. use_css selects the cheap
    conditional-sum-of-squares surrogate used for starting values.
    """
    phi = pacf_to_coeffs(x[:p]) if p > 0 else np.empty(0)
    theta = -pacf_to_coeffs(x[p:p + q]) if q > 0 else np.empty(0)
    mu = x[p + q] if drift else 0.0
    if use_css:
        n = w.shape[0]
        e = np.zeros(n)
        ssq = 0.0
        for t in range(p, n):
            pred = mu
            for i in range(p):
                pred += phi[i] * (w[t - i - 1] - mu)
            for j in range(q):
                if t - j - 1 >= 0:
                    pred += theta[j] * e[t - j - 1]
            e[t] = w[t] - pred
            ssq += e[t] * e[t]
        cnt = n - p
        if cnt <= 0:
            return np.inf
        s2 = ssq / cnt
        if s2 < _SIGMA2_FLOOR:
            s2 = _SIGMA2_FLOOR
        return 0.5 * cnt * np.log(s2)
    wc = w - mu if drift else w
    ll, _, _ = arma_kalman(wc, phi, theta)
    return -ll


@njit(cache=True)
def nelder_mead(w, p, q, drift, x0, use_css, maxiter, reltol):
    """Nelder-Mead simplex minimization of ``_objective``.

    Derivative-free, deterministic; stops when the simplex function
    spread falls below ``reltol`` relative to the best value, or after
    ``maxiter`` iterations. Returns (x_best, f_best, converged).
    """
    ndim = x0.shape[0]
    npts = ndim + 1
    sim = np.empty((npts, ndim))
    fsim = np.empty(npts)
    sim[0] = x0
    fsim[0] = _objective(x0, w, p, q, drift, use_css)
    for k in range(ndim):
        y = x0.copy()
        if y[k] != 0.0:
            y[k] = 1.1 * y[k]
        else:
            y[k] = 0.1
        sim[k + 1] = y
        fsim[k + 1] = _objective(y, w, p, q, drift, use_css)

    rho = 1.0
    chi = 2.0
    psi = 0.5
    sigma = 0.5
    converged = False
    for _ in range(maxiter):
        idx = np.argsort(fsim)
        sim = sim[idx]
        fsim = fsim[idx]
        if abs(fsim[-1] - fsim[0]) <= reltol * (abs(fsim[0]) + reltol):
            converged = True
            break
        xbar = np.zeros(ndim)
        for i in range(npts - 1):
            xbar += sim[i]
        xbar /= (npts - 1)
        xr = (1.0 + rho) * xbar - rho * sim[-1]
        fxr = _objective(xr, w, p, q, drift, use_css)
        doshrink = False
        if fxr < fsim[0]:
            xe = (1.0 + rho * chi) * xbar - rho * chi * sim[-1]
            fxe = _objective(xe, w, p, q, drift, use_css)
            if fxe < fxr:
                sim[-1] = xe
                fsim[-1] = fxe
            else:
                sim[-1] = xr
                fsim[-1] = fxr
        else:
            if fxr < fsim[-2]:
                sim[-1] = xr
                fsim[-1] = fxr
            else:
                if fxr < fsim[-1]:
                    xc = (1.0 + psi * rho) * xbar - psi * rho * sim[-1]
                    fxc = _objective(xc, w, p, q, drift, use_css)
                    if fxc <= fxr:
                        sim[-1] = xc
                        fsim[-1] = fxc
                    else:
                        doshrink = True
                else:
                    xcc = (1.0 - psi) * xbar + psi * sim[-1]
                    fxcc = _objective(xcc, w, p, q, drift, use_css)
                    if fxcc < fsim[-1]:
                        sim[-1] = xcc
                        fsim[-1] = fxcc
                    else:
                        doshrink = True
            if doshrink:
                for i in range(1, npts):
                    sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                    fsim[i] = _objective(sim[i], w, p, q, drift, use_css)
    idx = np.argsort(fsim)
    return sim[idx[0]], fsim[idx[0]], converged
