"""Estimation error against measurement budget for several Hankel sizes."""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import median_abs_deviation

from .._rng import derive_seed, make_rng
from ..era import InsufficientData, PrincipalBranchViolation, RankDeficient
from ..estimation import EstimationError, estimable_parameters, estimate_parameters
from ..identify import omega_from_prior
from ..models import ModelSpec
from ..qsim import NumericSystem, add_noise, coherent_evolve
from ..statespace import build, poly_system_for
from .config import RunConfig

FAILED_EPS = 100.0  # a failed estimate counts as magnitude 0, i.e. 100 % error
_ERRORS = (EstimationError, RankDeficient, InsufficientData, PrincipalBranchViolation, np.linalg.LinAlgError)


def draw_theta(params, rng: np.random.Generator, lo: float, hi: float, exclude: float) -> dict:
    """Uniform on ``[max(lo, exclude*(hi-lo)), hi]`` for every parameter."""
    a = max(lo, exclude * (hi - lo))
    return {p: float(rng.uniform(a, hi)) for p in params}


def prior_dt(cfg: RunConfig, model: ModelSpec, observables) -> float:
    if cfg.dt_policy == "explicit":
        return cfg.dt
    return cfg.dt_safety * math.pi / omega_from_prior(model, cfg.theta_max, observables)


def step_for(scenario: str, dt: float, n: int, j: int) -> float:
    """Sampling step for Hankel size ``j``: fixed, or shrunk so (2j-1) dt' = (2n-1) dt."""
    return dt if scenario == "fixed_dt" else (2 * n - 1) * dt / (2 * j - 1)


@dataclass(frozen=True)
class RobustnessCell:
    hankel: int
    budget: float
    param: str
    median_eps: float
    mad: float
    failures: int  # estimations that raised, summed over realizations and repeats


@dataclass
class RobustnessSummary:
    scenario: str
    sizes: tuple
    budgets: tuple
    dt: float
    n: int
    cells: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (hankel, budget) pairs with fewer than one shot per point
    thetas: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["hankel", "budget", "param", "median_eps", "mad"])
        for c in self.cells:
            w.writerow([c.hankel, repr(float(c.budget)), c.param, repr(c.median_eps), repr(c.mad)])
        return buf.getvalue()

    def cell(self, hankel: int, budget: float, param: str) -> RobustnessCell:
        for c in self.cells:
            if c.hankel == hankel and c.budget == budget and c.param == param:
                return c
        raise KeyError((hankel, budget, param))

    def series(self) -> list[dict]:
        """Plot-ready curves: one per (Hankel size, parameter)."""
        out = []
        params = sorted({c.param for c in self.cells})
        for j in self.sizes:
            for p in params:
                cs = sorted((c for c in self.cells if c.hankel == j and c.param == p), key=lambda c: c.budget)
                if cs:
                    out.append({
                        "hankel": j,
                        "param": p,
                        "budget": [c.budget for c in cs],
                        "median_eps": [c.median_eps for c in cs],
                        "mad": [c.mad for c in cs],
                        "failures": [c.failures for c in cs],
                    })
        return out

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "sizes": list(self.sizes),
            "budgets": list(self.budgets),
            "dt": self.dt,
            "n": self.n,
            "steps": {str(j): step_for(self.scenario, self.dt, self.n, j) for j in self.sizes},
            "series": self.series(),
            "skipped": [{"hankel": j, "budget": b} for j, b in self.skipped],
            "theta_distribution": "uniform",
            "thetas": self.thetas,
        }


@dataclass(frozen=True)
class _Task:
    model: ModelSpec
    observables: tuple
    scenario: str
    sizes: tuple
    budgets: tuple
    dt: float
    n: int
    sigma: float
    repeats: int
    seed: int
    theta_range: tuple  # (lo, hi, exclude)
    threshold: float
    solver: str


def _run_chunk(task: _Task, indices: list[int]) -> list[tuple]:
    """Realizations ``indices``: per realization, theta and the mean error of each cell."""
    system = poly_system_for(task.model, task.observables)
    systems = build(task.model, task.observables)
    params = estimable_parameters(task.model, system)
    out = []
    for r in indices:
        rng = make_rng(derive_seed(task.seed, r))
        theta = draw_theta(task.model.parameters(), rng, *task.theta_range)
        means: dict = {}
        fails: dict = {}
        for j in task.sizes:
            step = step_for(task.scenario, task.dt, task.n, j)
            clean = [coherent_evolve(NumericSystem.from_symbolic(s, theta, step), 2 * j) for s in systems]
            for b in task.budgets:
                shots = int(b // (2 * j))
                if shots < 1:
                    continue
                eps = {p: [] for p in params}
                nf = 0
                for _ in range(task.repeats):
                    noisy = [add_noise(ts, task.sigma, shots, int(rng.integers(2**63))) for ts in clean]
                    try:
                        rep = estimate_parameters(
                            task.model, noisy, task.observables, n=task.n, hankel_size=j, truth=theta,
                            threshold=task.threshold, solver=task.solver, system=system, strict=False,
                        )
                        got = rep.epsilon_percent
                    except _ERRORS:
                        got = {p: FAILED_EPS for p in params}
                        nf += 1
                    for p in params:
                        eps[p].append(got[p])
                means[(j, b)] = {p: float(np.mean(v)) for p, v in eps.items()}
                fails[(j, b)] = nf
        out.append((r, theta, means, fails))
    return out


def run_robustness(cfg: RunConfig) -> RobustnessSummary:
    model = cfg.model()
    observables = tuple(cfg.observable_list(model))
    n = build(model, observables)[0].n
    dt = prior_dt(cfg, model, observables)
    sizes = tuple(cfg.hankel_sizes) if cfg.hankel_sizes else (n, 2 * n)
    budgets = tuple(float(b) for b in cfg.budgets)
    skipped = [(j, b) for j in sizes for b in budgets if b < 2 * j]
    for j, b in skipped:
        warnings.warn(f"budget {b:g} is below one shot per point for Hankel size {j}; cell skipped", stacklevel=2)
    task = _Task(
        model, observables, cfg.scenario, sizes, budgets, dt, n, cfg.sigma, cfg.repeats, cfg.seed,
        (cfg.theta_min, cfg.theta_max, cfg.theta_exclude), cfg.threshold, cfg.solver,
    )
    indices = list(range(cfg.realizations))
    if cfg.workers > 1:
        chunks = [indices[k:: cfg.workers] for k in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(_run_chunk, [task] * len(chunks), chunks))
        results = [x for part in parts for x in part]
    else:
        results = _run_chunk(task, indices)
    results.sort(key=lambda x: x[0])
    summary = RobustnessSummary(cfg.scenario, sizes, budgets, dt, n, skipped=skipped)
    summary.thetas = [theta for _, theta, _, _ in results]
    for j in sizes:
        for b in budgets:
            if (j, b) in skipped:
                continue
            for p in estimable_parameters(model, poly_system_for(model, observables)):
                vals = np.array([means[(j, b)][p] for _, _, means, _ in results])
                med = float(np.median(vals))
                mad = float(median_abs_deviation(vals, scale=1.0))
                nf = sum(fails[(j, b)] for _, _, _, fails in results)
                summary.cells.append(RobustnessCell(j, b, p, med, mad, nf))
    return summary
