"""Selection of the Box-Cox parameter by rolling-origin forecast error.

The objective for a candidate lambda is the median, across horizons, of
a rolling-origin error column (MAFE or averaged interval score) over the
validation span. The minimizer over [0, 1] is found either by bounded
Brent scalar minimization or by an exhaustive grid; the chosen lambda is
then reported against alternatives on the held-out test span.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize_scalar

from .boxcox import validate_lambda
from .evaluation import HorizonErrorTable, rolling_origin
from .surface import AgeRateSurface, SampleSplit

CRITERIA = ("point", "interval")
METHODS = ("brent", "grid")


@dataclass(frozen=True)
class LambdaSelection:
    """Outcome of the lambda search: the minimizer, the criterion value
    there, and every (lambda, objective) pair probed, in probe order."""

    lambda_star: float
    criterion: str
    objective_value: float
    evaluations: tuple[tuple[float, float], ...]
    method: str


def objective(surface: AgeRateSurface, lmbda: float, criterion: str,
              split: SampleSplit, alpha: float = 0.2) -> float:
    """Median across horizons of the rolling-origin error column over the
    validation span (fit end = training end, eval end = validation end)."""
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    if split.validation_span < 2:
        raise ValueError("validation span must be at least 2 years")
    table = rolling_origin(surface, lmbda, split.training_end_year,
                           split.validation_end_year, alpha)
    if criterion == "point":
        return table.median_mafe
    return table.median_interval_score


def optimize_lambda(surface: AgeRateSurface, criterion: str,
                    split: SampleSplit, alpha: float = 0.2,
                    method: str = "brent", tolerance: float = 1e-3,
                    grid_step: float = 0.01,
                    n_jobs: int = 1) -> LambdaSelection:
    """Minimize the validation forecast-error objective over lambda in [0, 1].

    method="brent" runs combined golden-section / parabolic-interpolation
    scalar minimization to the given lambda tolerance; method="grid"
    evaluates lambda = 0, grid_step, ..., 1 exhaustively (ties go to the
    smaller lambda). The grid is embarrassingly parallel (``n_jobs``).
    """
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    if not 0.0 < grid_step <= 0.5:
        raise ValueError(f"grid_step must be in (0, 0.5], got {grid_step}")

    if method == "grid":
        lams = [round(v, 10) for v in np.arange(0.0, 1.0 + grid_step / 2.0,
                                                grid_step)]
        if n_jobs == 1:
            values = [objective(surface, lam, criterion, split, alpha)
                      for lam in lams]
        else:
            values = Parallel(n_jobs=n_jobs)(
                delayed(objective)(surface, lam, criterion, split, alpha)
                for lam in lams
            )
        evaluations = tuple(zip(lams, values))
    else:
        memo: dict[float, float] = {}
        trace: list[tuple[float, float]] = []

        def wrapped(lam: float) -> float:
            lam = min(max(float(lam), 0.0), 1.0)
            if lam not in memo:
                memo[lam] = objective(surface, lam, criterion, split, alpha)
                trace.append((lam, memo[lam]))
            return memo[lam]

        minimize_scalar(wrapped, bounds=(0.0, 1.0), method="bounded",
                        options={"xatol": tolerance, "maxiter": 200})
        evaluations = tuple(trace)

    best_lam, best_val = evaluations[0]
    for lam, val in evaluations[1:]:
        if val < best_val or (val == best_val and lam < best_lam):
            best_lam, best_val = lam, val
    return LambdaSelection(lambda_star=float(best_lam), criterion=criterion,
                           objective_value=float(best_val),
                           evaluations=evaluations, method=method)


def compare_lambdas(surface: AgeRateSurface, lambdas: Sequence[float],
                    split: SampleSplit, alpha: float = 0.2,
                    n_jobs: int = 1
                    ) -> list[tuple[float, HorizonErrorTable]]:
    """Rolling-origin accuracy tables on the TEST span (fit end =
    validation end, eval end = test end), one per candidate lambda, in
    the order given."""
    if len(lambdas) == 0:
        raise ValueError("need at least one lambda to compare")
    lams = [validate_lambda(lam) for lam in lambdas]

    def run(lam: float) -> HorizonErrorTable:
        return rolling_origin(surface, lam, split.validation_end_year,
                              split.test_end_year, alpha)

    if n_jobs == 1:
        tables = [run(lam) for lam in lams]
    else:
        tables = Parallel(n_jobs=n_jobs)(delayed(run)(lam) for lam in lams)
    return list(zip(lams, tables))
