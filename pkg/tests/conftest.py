import numpy as np
import pytest

from ratecast import AgeRateSurface, synthetic_surface


@pytest.fixture
def tiny_surface():
    """3 years x 2 ages, handy for shape and round-trip checks."""
    return AgeRateSurface(
        years=np.array([2000, 2001, 2002]),
        ages=np.array([20, 21]),
        rates=np.array([[0.10, 0.20], [0.11, 0.19], [0.12, 0.18]]),
    )


@pytest.fixture(scope="session")
def noisy_surface():
    """A 60-year synthetic surface at lambda=0.5 with the default
    (moderate) noise, shared where only a realistic surface is needed."""
    return synthetic_surface(n_years=60, lmbda=0.5, seed=7)


@pytest.fixture(scope="session")
def noisefree_surface():
    """Deterministic K=1 random-walk-with-drift surface at lambda=0.5:
    exactly ARIMA-predictable, so pipeline forecasts should be exact."""
    return synthetic_surface(n_years=40, lmbda=0.5, score_sigma=0.0,
                             noise_sigma=0.0, seed=0)


def simulate_ar1(phi, n, rng, sigma=1.0, burn=100):
    """Draw an AR(1) path with standard-normal innovations."""
    e = rng.standard_normal(n + burn) * sigma
    y = np.empty(n + burn)
    y[0] = e[0] / np.sqrt(1.0 - phi * phi)
    for t in range(1, n + burn):
        y[t] = phi * y[t - 1] + e[t]
    return y[burn:]
