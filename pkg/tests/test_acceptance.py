"""Acceptance criteria 1-8: one PASS/FAIL line each.

Run under pytest (lines are printed live) or directly with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import functools
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from test_polysys_properties import (  # noqa: E402
    check_permutation_uniqueness,
    check_radical_squarefree,
    check_s_polynomials,
    check_sturm_companion,
)
from test_qsim import FAMILIES, oracle_gap, random_theta  # noqa: E402
from test_statespace import DRAWS, c1_failures, c2_failures, c3_failures  # noqa: E402

from probeid._rng import derive_seed, make_rng  # noqa: E402
from probeid.estimation import estimate_parameters  # noqa: E402
from probeid.harness.config import parse_config  # noqa: E402
from probeid.harness.robustness import draw_theta, run_robustness  # noqa: E402
from probeid.identify import IDENTIFIABLE, chain_timing, resource_bounds  # noqa: E402
from probeid.identify import test_identifiability as identifiability  # noqa: E402
from probeid.models import ModelSpec  # noqa: E402
from probeid.qsim import simulate_model  # noqa: E402

SEED = 0


def report(k: int, ok: bool, detail: str, capsys=None) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)


def cases():
    for fam in FAMILIES:
        for N in (2, 3, 4):
            for two in ((False, True) if fam == "ExchangeTransverse" else (False,)):
                yield fam, N, two


@functools.lru_cache(maxsize=None)
def regression():
    t0 = time.perf_counter()
    out = {}
    for fam, N, two in cases():
        m = ModelSpec(fam, N)
        out[(fam, N, two)] = identifiability(m, m.default_observables(two=two), seed=SEED)
    return out, time.perf_counter() - t0


def expected(fam, N, two):
    if fam == "IsingNoField":
        return (IDENTIFIABLE if N == 2 else "NonIdentifiable"), ()
    if fam == "ExchangeTransverse":
        return (IDENTIFIABLE, tuple(f"w{k}" for k in range(1, N + 1))) if two else ("NonIdentifiable", ())
    return IDENTIFIABLE, ()


# ---------------------------------------------------------------------------

def criterion_1():
    verdicts, secs = regression()
    bad = []
    for key, v in verdicts.items():
        status, signs = expected(*key)
        if v.status != status or (status == IDENTIFIABLE and tuple(sorted(v.sign_recovered)) != signs):
            bad.append(f"{key}: {v.status}/{v.cause}")
    return not bad and secs < 300, f"{len(verdicts) - len(bad)}/{len(verdicts)} verdicts match, {secs:.1f} s" + (
        f"; mismatches {bad}" if bad else "")


def criterion_2():
    bad = []
    for N in range(2, 6):
        def lam(fam, two=False):
            m = ModelSpec(fam, N)
            return resource_bounds(m, m.default_observables(two=two), theta_max=1.0).lambda_min

        got = (lam("IsingTransverse"), lam("ExchangeNoField"), lam("ExchangeTransverse", True))
        if got != (4 * N, 2 * N, 8 * N):
            bad.append((N, got))
    ising = resource_bounds(ModelSpec("IsingNoField", 2), theta_max=1.0).lambda_min
    ok = not bad and ising == 4
    return ok, f"Ising N=2 -> {ising}; 4N, 2N, 8N exact for N=2..5" if ok else f"mismatches {bad}, Ising {ising}"


def criterion_3():
    printed = c1_failures(as_printed=True)
    corrected = c1_failures()
    c2, c3 = c2_failures(), c3_failures()
    ok = printed == 0 and c2 == 0 and c3 == 0
    detail = (f"transverse Ising forms as stated fail {printed}/{DRAWS} draws (a3, a4 are not identities; "
              f"corrected forms fail {corrected}/{DRAWS}), exchange forms fail {c2}/{DRAWS}, "
              f"exchange-in-field forms and identities fail {c3}/{DRAWS}")
    return ok, detail


def criterion_4():
    worst = {}
    for fam, N, two in cases():
        if fam == "ExchangeTransverse" and not two:
            continue
        m = ModelSpec(fam, N)
        obs = m.default_observables(two=two)
        rb = resource_bounds(m, obs, theta_max=100.0)
        errs = []
        for d in range(10):
            theta = draw_theta(m.parameters(), make_rng(derive_seed(SEED, d)), 0.0, 100.0, 0.05)
            series = simulate_model(m, theta, rb.dt_max, rb.lambda_per_observable, obs)
            try:
                errs.append(max(estimate_parameters(m, series, obs, truth=theta).epsilon_percent.values()))
            except Exception:  # any failure counts against the criterion
                errs.append(float("inf"))
        worst[(fam, N)] = (max(errs), sum(e <= 1e-6 for e in errs))
    bad = {k: v for k, v in worst.items() if v[0] > 1e-6}
    detail = f"{len(worst) - len(bad)}/{len(worst)} family/size cases within 1e-6 % on all 10 draws"
    if bad:
        detail += "; over: " + ", ".join(f"{f} N={n} ({ok}/10 ok, worst {w:.1e} %)" for (f, n), (w, ok) in bad.items())
    return not bad, detail


def criterion_5():
    t0 = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(SEED)
    for fam in FAMILIES:
        for N in range(2, 6):
            m = ModelSpec(fam, N)
            for _ in range(10):
                worst = max(worst, oracle_gap(m, random_theta(m, rng), dt=0.05, count=50))
    secs = time.perf_counter() - t0
    return worst <= 1e-10 and secs < 120, f"max gap {worst:.1e} over 4 families x N=2..5 x 10 draws, {secs:.1f} s"


def _robustness(scenario):
    cfg = parse_config(
        "model.family = ExchangeNoField\nmodel.N = 4\nnoise.sigma = 1\n"
        f"robustness.scenario = {scenario}\nrobustness.realizations = 100\nrobustness.repeats = 20\n"
    ).validate()
    return run_robustness(cfg)


def criterion_6():
    t0 = time.perf_counter()
    parts, ok = [], True
    for scenario, better, worse in (("fixed_dt", 8, 4), ("fixed_T", 4, 8)):
        s = _robustness(scenario)
        for p in ("J1", "J2", "J3"):
            wins = sum(s.cell(better, b, p).median_eps <= s.cell(worse, b, p).median_eps for b in s.budgets)
            ok &= wins >= 4
            parts.append(f"{scenario} {p}: size {better} <= size {worse} at {wins}/5")
    return ok, "; ".join(parts) + f" ({time.perf_counter() - t0:.0f} s)"


def criterion_7():
    ct = chain_timing(50, 1.0)
    J, a = 1.7, 0.4
    ct2 = chain_timing(9, J, a)
    exact = ct2.v_g == 2 * J * a and ct2.tau == (9 - 1) / J
    verdicts, _ = regression()
    bad = []
    for (fam, N, two), v in verdicts.items():
        if not v.identifiable:
            continue
        m = ModelSpec(fam, N)
        lam = resource_bounds(m, m.default_observables(two=two), theta_max=1.0).lambda_per_observable
        if v.radical_size is None or lam / 2 < v.radical_size + 1:
            bad.append((fam, N, two, lam, v.radical_size))
    ok = 0.95 <= ct.ratio <= 1.0 and exact and not bad
    return ok, f"ratio(N=50) = {ct.ratio:.5f}, v_g and tau exact: {exact}, lambda/2 >= |G(rad I)| + 1 violations: {bad or 'none'}"


def criterion_8():
    f = (check_s_polynomials(), check_permutation_uniqueness(), check_radical_squarefree(), check_sturm_companion())
    return sum(f) == 0, "failures (S-poly, permutation, radical, Sturm) = " + str(f)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def _check(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    report(k, ok, detail, capsys)
    assert ok, detail


def test_criterion_1(capsys):
    _check(1, capsys)


def test_criterion_2(capsys):
    _check(2, capsys)


def test_criterion_3(capsys):
    _check(3, capsys)


def test_criterion_4(capsys):
    _check(4, capsys)


def test_criterion_5(capsys):
    _check(5, capsys)


def test_criterion_6(capsys):
    _check(6, capsys)


def test_criterion_7(capsys):
    _check(7, capsys)


def test_criterion_8(capsys):
    _check(8, capsys)


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, 1):
        report(k, *fn())
