from __future__ import annotations

import math

import numpy as np
import pytest

from probeid.harness.config import parse_config
from probeid.harness.robustness import FAILED_EPS, draw_theta, run_robustness, step_for
from probeid._rng import make_rng


def cfg(extra="", realizations=6, repeats=3):
    return parse_config(
        f"model.family = ExchangeNoField\nmodel.N = 3\nrobustness.realizations = {realizations}\n"
        f"robustness.repeats = {repeats}\n" + extra
    ).validate()


def test_theta_draws_respect_exclusion():
    th = draw_theta(["a", "b"], make_rng(1), 0.0, 100.0, 0.05)
    vals = np.array([draw_theta(["x"], make_rng(k), 0.0, 100.0, 0.05)["x"] for k in range(2000)])
    assert vals.min() >= 5.0 and vals.max() <= 100.0
    assert abs(vals.mean() - 52.5) < 2.0
    assert set(th) == {"a", "b"}


def test_steps_per_scenario():
    assert step_for("fixed_dt", 0.1, 3, 6) == 0.1
    # fixed_T keeps the span (2j - 1) dt' equal to that of the minimal record
    assert step_for("fixed_T", 0.1, 3, 6) * 11 == pytest.approx(0.1 * 5)


def test_noiseless_cells_are_exact():
    s = run_robustness(cfg("noise.sigma = 0\nrobustness.budgets = 1e2 1e4\n"))
    assert s.cells and all(c.median_eps <= 1e-6 and c.failures == 0 for c in s.cells)


def test_small_budget_cells_are_skipped_with_warning():
    with pytest.warns(UserWarning, match="below one shot"):
        s = run_robustness(cfg("noise.sigma = 1\nrobustness.budgets = 8 1e4\n"))
    assert s.skipped == [(6, 8.0)]
    assert {(c.hankel, c.budget) for c in s.cells} == {(3, 8.0), (3, 1e4), (6, 1e4)}


def test_worker_count_does_not_change_results():
    a = run_robustness(cfg("noise.sigma = 1\nrobustness.budgets = 1e4 1e6\n"))
    b = run_robustness(cfg("noise.sigma = 1\nrobustness.budgets = 1e4 1e6\nrun.workers = 3\n"))
    assert a.to_csv() == b.to_csv() and a.thetas == b.thetas


def test_more_shots_reduce_error():
    # quadrupling the budget halves sigma / sqrt(M): the median falls at >= 4 of 5 levels
    budgets = " ".join(str(4.0**k * 1e4) for k in range(6))
    s = run_robustness(cfg(f"noise.sigma = 1\nera.hankel_sizes = 3\nrobustness.budgets = {budgets}\n", 50, 1))
    for p in ("J1", "J2"):
        med = [s.cell(3, b, p).median_eps for b in s.budgets]
        assert sum(y < x for x, y in zip(med, med[1:])) >= 4


def test_failures_count_as_full_error():
    # one shot per point at sigma = 100: many estimates fail and are counted, not dropped
    s = run_robustness(cfg("noise.sigma = 100\nrobustness.budgets = 6\nera.hankel_sizes = 3\n"))
    assert all(c.failures > 0 and math.isfinite(c.median_eps) for c in s.cells)
    assert FAILED_EPS == 100.0


def test_csv_and_json_shapes():
    s = run_robustness(cfg("noise.sigma = 1\nrobustness.budgets = 1e4\n"))
    lines = s.to_csv().splitlines()
    assert lines[0] == "hankel,budget,param,median_eps,mad" and len(lines) == 1 + 2 * 2
    doc = s.to_json()
    assert doc["theta_distribution"] == "uniform" and len(doc["thetas"]) == 6
