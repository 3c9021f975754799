"""Transformation-parameter selection: objective, optimizers, comparisons."""

import numpy as np
import pytest

import ratecast.lambda_select as ls
from ratecast import (HorizonErrorTable, SampleSplit, compare_lambdas,
                      objective, optimize_lambda, synthetic_surface)


def canned_table(mafe_col):
    mafe_col = np.asarray(mafe_col, dtype=float)
    m = mafe_col.size
    return HorizonErrorTable(horizons=np.arange(1, m + 1), mafe=mafe_col,
                             interval_score=2.0 * mafe_col,
                             origins_per_horizon=np.arange(m, 0, -1))


@pytest.fixture
def stub_split():
    return SampleSplit(1972, 1989, 2006)


# ---------------------------------------------------------------------------
# objective = median over horizons
# ---------------------------------------------------------------------------

def test_objective_takes_ninth_order_statistic_of_17(monkeypatch, stub_split):
    column = np.linspace(0.001, 0.017, 17)  # sorted: median is entry 9
    monkeypatch.setattr(ls, "rolling_origin",
                        lambda *a, **k: canned_table(column))
    value = objective(None, 0.5, "point", stub_split)
    assert value == pytest.approx(np.sort(column)[8])


def test_objective_even_count_mid_mean(monkeypatch):
    monkeypatch.setattr(ls, "rolling_origin",
                        lambda *a, **k: canned_table([1.0, 2.0, 3.0, 10.0]))
    split = SampleSplit(2000, 2004, 2008)
    assert objective(None, 0.5, "point", split) == pytest.approx(2.5)


def test_objective_interval_criterion_uses_score_column(monkeypatch):
    monkeypatch.setattr(ls, "rolling_origin",
                        lambda *a, **k: canned_table([1.0, 2.0, 3.0]))
    split = SampleSplit(2000, 2003, 2006)
    assert objective(None, 0.5, "interval", split) == pytest.approx(4.0)


def test_objective_validates_criterion_and_span(stub_split):
    with pytest.raises(ValueError, match="criterion"):
        objective(None, 0.5, "rmse", stub_split)
    with pytest.raises(ValueError, match="validation span"):
        objective(None, 0.5, "point", SampleSplit(2000, 2001, 2002))


# ---------------------------------------------------------------------------
# optimize_lambda on stub objectives
# ---------------------------------------------------------------------------

def test_brent_finds_quadratic_minimum(monkeypatch, stub_split):
    monkeypatch.setattr(ls, "objective",
                        lambda surface, lam, criterion, split, alpha:
                        (lam - 0.3) ** 2)
    sel = optimize_lambda(None, "point", stub_split, method="brent",
                          tolerance=1e-4)
    assert sel.lambda_star == pytest.approx(0.3, abs=1e-3)
    assert sel.method == "brent"
    assert len(sel.evaluations) >= 5


def test_grid_hits_exact_point(monkeypatch, stub_split):
    monkeypatch.setattr(ls, "objective",
                        lambda surface, lam, criterion, split, alpha:
                        abs(lam - 0.46))
    sel = optimize_lambda(None, "point", stub_split, method="grid")
    assert sel.lambda_star == 0.46
    assert len(sel.evaluations) == 101


def test_grid_ties_go_to_smaller_lambda(monkeypatch, stub_split):
    monkeypatch.setattr(ls, "objective",
                        lambda surface, lam, criterion, split, alpha: 1.0)
    sel = optimize_lambda(None, "point", stub_split, method="grid",
                          grid_step=0.25)
    assert sel.lambda_star == 0.0


def test_brent_at_least_as_good_as_grid_on_quadratic(monkeypatch, stub_split):
    stub = lambda surface, lam, criterion, split, alpha: (lam - 0.37) ** 2
    monkeypatch.setattr(ls, "objective", stub)
    brent = optimize_lambda(None, "point", stub_split, method="brent",
                            tolerance=1e-4)
    grid = optimize_lambda(None, "point", stub_split, method="grid")
    assert brent.objective_value <= grid.objective_value + 1e-12


def test_objective_value_is_min_of_trace(monkeypatch, stub_split):
    monkeypatch.setattr(ls, "objective",
                        lambda surface, lam, criterion, split, alpha:
                        np.cos(7 * lam))
    for method in ("brent", "grid"):
        sel = optimize_lambda(None, "point", stub_split, method=method,
                              grid_step=0.05)
        assert sel.objective_value == min(v for _, v in sel.evaluations)
        assert any(lam == sel.lambda_star for lam, _ in sel.evaluations)


def test_optimizer_option_validation(stub_split):
    with pytest.raises(ValueError, match="method"):
        optimize_lambda(None, "point", stub_split, method="newton")
    with pytest.raises(ValueError, match="tolerance"):
        optimize_lambda(None, "point", stub_split, tolerance=0.0)
    with pytest.raises(ValueError, match="grid_step"):
        optimize_lambda(None, "point", stub_split, method="grid",
                        grid_step=0.0)


# ---------------------------------------------------------------------------
# synthetic-surface objective: the bowl sits at the true lambda
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def generative_surface():
    return synthetic_surface(n_years=60, lmbda=0.5, seed=11)


def test_true_lambda_beats_endpoints(generative_surface):
    surface = generative_surface
    last = int(surface.years[-1])
    split = SampleSplit(last - 16, last - 8, last)
    at_half = objective(surface, 0.5, "point", split)
    assert at_half < objective(surface, 0.0, "point", split)
    assert at_half < objective(surface, 1.0, "point", split)


def test_grid_result_no_worse_than_endpoints(generative_surface):
    surface = generative_surface
    last = int(surface.years[-1])
    split = SampleSplit(last - 16, last - 8, last)
    sel = optimize_lambda(surface, "point", split, method="grid",
                          grid_step=0.25)
    values = dict(sel.evaluations)
    assert sel.objective_value <= values[0.0]
    assert sel.objective_value <= values[1.0]


def test_selection_is_deterministic(generative_surface):
    surface = generative_surface
    last = int(surface.years[-1])
    split = SampleSplit(last - 12, last - 6, last)
    a = optimize_lambda(surface, "point", split, method="grid", grid_step=0.5)
    b = optimize_lambda(surface, "point", split, method="grid", grid_step=0.5)
    assert a.lambda_star == b.lambda_star
    assert a.evaluations == b.evaluations


# ---------------------------------------------------------------------------
# compare_lambdas
# ---------------------------------------------------------------------------

def test_compare_repeated_lambda_identical_columns(generative_surface):
    surface = generative_surface
    last = int(surface.years[-1])
    split = SampleSplit(last - 8, last - 4, last)
    results = compare_lambdas(surface, [0.5, 0.5], split)
    assert len(results) == 2
    (lam_a, tab_a), (lam_b, tab_b) = results
    assert lam_a == lam_b == 0.5
    assert np.array_equal(tab_a.mafe, tab_b.mafe)
    assert np.array_equal(tab_a.interval_score, tab_b.interval_score)


def test_compare_true_lambda_dominates_log(generative_surface):
    surface = generative_surface
    last = int(surface.years[-1])
    split = SampleSplit(last - 16, last - 8, last)
    results = compare_lambdas(surface, [0.5, 0.0], split)
    mafe_true = results[0][1].mafe
    mafe_log = results[1][1].mafe
    assert np.mean(mafe_true) < np.mean(mafe_log)


def test_compare_requires_lambdas():
    with pytest.raises(ValueError, match="at least one"):
        compare_lambdas(None, [], SampleSplit(2000, 2002, 2004))


def test_compare_evaluates_on_test_span(monkeypatch, generative_surface):
    calls = []

    def spy(surface, lam, fit_end, eval_end, alpha):
        calls.append((fit_end, eval_end))
        return canned_table([1.0, 2.0])

    monkeypatch.setattr(ls, "rolling_origin", spy)
    split = SampleSplit(1972, 1989, 2006)
    compare_lambdas(generative_surface, [0.4], split)
    assert calls == [(1989, 2006)]
