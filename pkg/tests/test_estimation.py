from __future__ import annotations

import numpy as np
import pytest
from gmpy2 import mpq

from probeid._rng import derive_seed, make_rng
from probeid.era import relative_error_percent
from probeid.estimation import (
    AmbiguousSolution,
    NoConsistentSolution,
    estimate_parameters,
    jacobi_from_moments,
    markov_moments,
    solve_catalog,
)
from probeid.harness.robustness import draw_theta
from probeid.identify import resource_bounds
from probeid.models import ModelSpec
from probeid.qsim import add_noise, simulate_model
from probeid.statespace import build, poly_system_for, sum_transfer, transfer_function


def minimal_run(model, theta, two=False, seed=None, sigma=0.0):
    obs = model.default_observables(two=two)
    rb = resource_bounds(model, obs, theta_max=100.0)
    series = simulate_model(model, theta, rb.dt_max, rb.lambda_per_observable, obs)
    if sigma:
        series = [add_noise(ts, sigma, 1, derive_seed(seed, k)) for k, ts in enumerate(series)]
    return estimate_parameters(model, series, obs, truth=theta)


def worst_error(fam, N, draws=10, seed=0) -> float:
    """Largest relative magnitude error over noiseless minimal-length runs."""
    m = ModelSpec(fam, N)
    worst = 0.0
    for d in range(draws):
        theta = draw_theta(m.parameters(), make_rng(derive_seed(seed, d)), 0.0, 100.0, 0.05)
        rep = minimal_run(m, theta, two=fam == "ExchangeTransverse")
        worst = max(worst, max(rep.epsilon_percent.values()))
    return worst


def test_exchange_coefficients_to_squares():
    # v = (13, 9, 14) from theta = (1, 2, 3); closed forms give z = (1, 4, 9)
    m = ModelSpec("ExchangeNoField", 4)
    ps = poly_system_for(m)
    assert ps.v_values({"J1": mpq(1), "J2": mpq(2), "J3": mpq(3)}) == [13, 9, 14]
    num, den = [0.0, 13.0, 0.0, 1.0], [9.0, 0.0, 14.0, 0.0, 1.0]
    squares, signed = solve_catalog(m, m.default_observables(), num, den)
    assert squares == pytest.approx({"J1": 1.0, "J2": 4.0, "J3": 9.0}, rel=1e-12)
    assert signed == {}


def test_epsilon_arithmetic():
    m = ModelSpec("IsingNoField", 2)
    rep = minimal_run(m, {"J1": 1.9})
    assert rep.magnitudes["J1"] == pytest.approx(1.9, rel=1e-10)
    assert relative_error_percent(2.0, 1.9) == pytest.approx(5.0)


def test_exchange_field_two_observables_recovers_signs():
    m = ModelSpec("ExchangeTransverse", 2)
    theta = {"w1": -31.0, "w2": 57.0, "J1": -44.0}
    rep = minimal_run(m, theta, two=True)
    assert rep.signed == pytest.approx({"w1": -31.0, "w2": 57.0}, rel=1e-8)
    assert rep.magnitudes == pytest.approx({"w1": 31.0, "w2": 57.0, "J1": 44.0}, rel=1e-8)
    # the reference a3^2 = v5 - v2 - v3^2, on our coefficients (v2, v3, v5 = num1, num2, den2)
    c = dict(zip(rep.coefficients["labels"], rep.coefficients["values"]))
    assert c["den[s^2]"] - c["num[s^1]"] - c["num[s^2]"] ** 2 == pytest.approx(44.0**2, rel=1e-8)


def test_exchange_field_single_observable_is_ambiguous():
    m = ModelSpec("ExchangeTransverse", 2)
    with pytest.raises(AmbiguousSolution):
        minimal_run(m, {"w1": 3.0, "w2": 5.0, "J1": 4.0})


def test_ising_without_field_reports_only_the_visible_coupling():
    m = ModelSpec("IsingNoField", 4)
    rep = minimal_run(m, {"J1": 13.0, "J2": 70.0, "J3": 5.0})
    assert rep.parameters == ["J1"] and rep.not_estimable == ["J2", "J3"]
    assert rep.magnitudes["J1"] == pytest.approx(13.0, rel=1e-12)


@pytest.mark.parametrize("fam,N", [
    ("IsingNoField", 2), ("IsingNoField", 3), ("IsingNoField", 4),
    ("IsingTransverse", 2), ("IsingTransverse", 3),
    ("ExchangeNoField", 2), ("ExchangeNoField", 3), ("ExchangeNoField", 4),
    ("ExchangeTransverse", 2),
])
def test_noiseless_minimal_length_recovery(fam, N):
    assert worst_error(fam, N) <= 1e-6


def test_generic_solver_agrees_with_closed_form():
    m = ModelSpec("IsingTransverse", 3)
    theta = {"w1": 40.0, "w2": 71.0, "w3": 22.0, "J1": 63.0, "J2": 35.0}
    obs = m.default_observables()
    rb = resource_bounds(m, obs, theta_max=100.0)
    series = simulate_model(m, theta, rb.dt_max, rb.lambda_per_observable, obs)
    a = estimate_parameters(m, series, obs, solver="closed")
    b = estimate_parameters(m, series, obs, solver="generic")
    assert b.magnitudes == pytest.approx(a.magnitudes, rel=1e-7)


def test_moments_and_jacobi_round_trip():
    # T(s) = s / (s^2 + 4): Markov moments 1, 0, -4, 0, 16, ...
    mu = markov_moments([0.0, 1.0], [4.0, 0.0, 1.0], 4)
    assert np.allclose(mu, [1, 0, -4, 0])
    alpha, beta = jacobi_from_moments(mu, 2)
    assert np.allclose(alpha, 0) and beta[1] == pytest.approx(-4.0)


def test_zero_moment_is_inconsistent():
    with pytest.raises(NoConsistentSolution):
        jacobi_from_moments([0.0, 1.0, 0.0, 1.0], 2)


def test_transfer_coefficients_match_symbolic():
    m = ModelSpec("ExchangeTransverse", 2)
    obs = m.default_observables(two=True)
    theta = {"w1": 12.0, "w2": -35.0, "J1": 50.0}
    rep = minimal_run(m, theta, two=True)
    tf = sum_transfer([transfer_function(s) for s in build(m, obs)])
    num, den = tf.evaluate({p: mpq(v) for p, v in theta.items()})
    exact = {f"num[s^{k}]": float(c) for k, c in enumerate(num)} | {f"den[s^{k}]": float(c) for k, c in enumerate(den)}
    for label, value in zip(rep.coefficients["labels"], rep.coefficients["values"]):
        assert value == pytest.approx(exact[label], rel=1e-7, abs=1e-7 * max(map(abs, exact.values())))


def test_noise_degrades_gracefully():
    m = ModelSpec("ExchangeNoField", 3)
    theta = {"J1": 60.0, "J2": 45.0}
    clean = minimal_run(m, theta)
    noisy = minimal_run(m, theta, seed=5, sigma=1e-6)
    assert max(clean.epsilon_percent.values()) < max(noisy.epsilon_percent.values()) < 1.0


def test_report_json_shape():
    rep = minimal_run(ModelSpec("ExchangeNoField", 3), {"J1": 60.0, "J2": 45.0})
    doc = rep.to_json()
    assert [p["name"] for p in doc["parameters"]] == ["J1", "J2"]
    assert set(doc["parameters"][0]) == {"name", "magnitude", "sign_recovered", "truth", "epsilon_percent"}
    assert doc["not_estimable"] == []
