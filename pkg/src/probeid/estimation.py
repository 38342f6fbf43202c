"""From probe series to parameter magnitudes: ERA, coefficient matching and
solution of the coefficient equations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .era import (
    SPURIOUS_THRESHOLD,
    RealizationEst,
    realize_series,
    relative_error_percent,
    transfer_est,
)
from .models import ModelSpec
from .pauli import PauliString
from .polysys import (
    DEFAULT_REDUCTION_CAP,
    PositiveDimensional,
    classify_shape,
    enumerate_real_solutions,
    groebner,
    is_zero_dimensional,
    radical_basis,
    shape_with_separating_form,
)
from .qsim import TimeSeries
from .statespace import PolySystem, build, measured_coefficients, poly_system_for

RATIONAL_DENOMINATOR_CAP = 10**6


class EstimationError(RuntimeError):
    pass


class NoConsistentSolution(EstimationError):
    """No solution of the coefficient equations has positive squared parameters."""


class AmbiguousSolution(EstimationError):
    """Several admissible solutions, so the magnitudes are not determined."""


# ---------------------------------------------------------------------------
# moments and continued fractions

def markov_moments(numerator: Sequence[float], denominator: Sequence[float], count: int) -> np.ndarray:
    """``T(s) = sum_k m_k s^-(k+1)`` for a monic denominator (ascending coefficients)."""
    den = np.asarray(denominator, dtype=complex)
    num = np.asarray(numerator, dtype=complex)
    n = len(den) - 1
    m = np.zeros(count, dtype=complex)
    for k in range(count):
        i = n - 1 - k
        acc = num[i] if 0 <= i < len(num) else 0.0
        for j in range(1, min(k, n) + 1):
            acc -= den[n - j] * m[k - j]
        m[k] = acc
    return m


def jacobi_from_moments(mu: Sequence, n: int):
    """Chebyshev algorithm: recurrence coefficients ``alpha[0:n]``, ``beta[0:n]``.

    With these, ``sum_k mu_k s^-(k+1) = beta0 / (s - alpha0 - beta1 / (s - alpha1 - ...))``.
    """
    mu = np.asarray(mu)
    if len(mu) < 2 * n:
        raise ValueError(f"need {2 * n} moments, got {len(mu)}")
    alpha = np.zeros(n, dtype=mu.dtype)
    beta = np.zeros(n, dtype=mu.dtype)
    sig_prev = np.zeros(2 * n, dtype=mu.dtype)
    sig = mu[: 2 * n].copy()
    if mu[0] == 0:
        raise NoConsistentSolution("zeroth moment vanishes")
    alpha[0] = mu[1] / mu[0]
    beta[0] = mu[0]
    # a vanishing pivot (a breakdown on noisy data) propagates as nan
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(1, n):
            new = np.zeros(2 * n, dtype=mu.dtype)
            for l in range(k, 2 * n - k):
                new[l] = sig[l + 1] - alpha[k - 1] * sig[l] - beta[k - 1] * sig_prev[l]
            alpha[k] = new[k + 1] / new[k] - sig[k] / sig[k - 1]
            beta[k] = new[k] / sig[k - 1]
            sig_prev, sig = sig, new
    return alpha, beta


def _catalog_kind(model: ModelSpec, observables: Sequence[PauliString]) -> str | None:
    default = model.default_observables()
    if model.family == "ExchangeTransverse":
        if list(observables) == model.default_observables(two=True):
            return "jacobi"
        return None
    if list(observables) == default and model.family != "Custom":
        return "stieltjes"
    return None


def solve_catalog(
    model: ModelSpec, observables: Sequence[PauliString], numerator, denominator, present: Sequence[str] | None = None,
) -> tuple[dict, dict]:
    """Closed-form inversion for the catalog families.

    Chains seen through their end spin have tridiagonal generators, so the
    transfer function is a terminating continued fraction whose partial
    numerators are the squared parameters (in chain order). For the exchange
    chain in a field, ``T_X + i T_Y`` is a J-fraction whose diagonal gives the
    signed fields. ``present`` restricts the chain to the parameters that
    reach the probe.
    """
    kind = _catalog_kind(model, observables)
    if kind is None:
        raise ValueError("no closed form for this model/observable choice")
    order = [p for p in model.chain_order() if present is None or p in present]
    if kind == "stieltjes":
        n = len(denominator) - 1
        mu = markov_moments(numerator, denominator, 2 * n).real
        _, beta = jacobi_from_moments(mu, n)
        sq = -beta[1:]
        if len(sq) != len(order):
            raise EstimationError("transfer function order does not match the model")
        return {p: float(v) for p, v in zip(order, sq)}, {}
    # J-fraction: numerator odd part belongs to X1, even part to Y1
    num = np.asarray(numerator, dtype=float)
    n = len(denominator) - 1
    k = np.arange(len(num))
    num_x = np.where(k % 2 == (n - 1) % 2, num, 0.0)
    num_y = num - num_x
    mu = markov_moments(num_x + 1j * num_y, denominator, n)
    nu = mu / (1j ** np.arange(n))
    N = model.N
    alpha, beta = jacobi_from_moments(nu.real, N)
    squares = {f"J{j}": float(beta[j]) for j in range(1, N)}
    signed = {f"w{j + 1}": float(alpha[j]) for j in range(N)}
    squares.update({p: v * v for p, v in signed.items()})
    return squares, signed


# ---------------------------------------------------------------------------
# generic path

def rationalize(x: float, cap: int = RATIONAL_DENOMINATOR_CAP) -> mpq:
    f = Fraction(float(x)).limit_denominator(cap)
    return mpq(f.numerator, f.denominator)


def solve_generic(
    ps: PolySystem, v: Sequence[float], cap: int = DEFAULT_REDUCTION_CAP, exact: bool = True
) -> list[dict]:
    """Admissible solutions of ``lhs(z) = v`` as ``{z: value}`` dicts.

    Square systems are rationalized and solved exactly, and every admissible
    real solution is then polished against the floating-point v's. Rounding
    makes an overdetermined system inconsistent, so those (and square systems
    whose rounded version has no admissible root) go to a multi-start
    least-squares search on relative residuals.
    """
    from scipy.optimize import least_squares

    v = np.asarray(v, dtype=float)
    names = list(ps.zring.names)
    squared = set(ps.squared())

    weight = 1.0 / np.maximum(np.abs(v), 1e-300)

    def residual(z):
        point = dict(zip(names, z))
        return (np.array([f.evaluate(point) for f in ps.lhs], dtype=float) - v) * weight

    starts: list[np.ndarray] = []
    if exact and len(ps.lhs) == len(names):
        eqs = ps.equations([rationalize(x) for x in v])
        G = groebner(eqs, cap=cap)
        if not G.is_unit():
            if not is_zero_dimensional(G):
                raise PositiveDimensional("coefficient equations have infinitely many solutions")
            R = radical_basis(eqs, G=G, cap=cap)
            shape = classify_shape(R)
            if shape.kind not in ("Maximal", "ShapeLemma"):
                shape, _ = shape_with_separating_form(list(R.elements), cap=cap)
            for s in enumerate_real_solutions(shape):
                if all(s.sign(z) > 0 for z in squared):
                    starts.append(np.array([s.value(z) for z in names]))
    if not starts:
        # parameters scale like the largest v to the power 1/(its degree in theta)
        deg = max(1, max(f.total_degree() for f in ps.lhs))
        scale = max(1.0, float(np.max(np.abs(v))) ** (1.0 / deg))
        power = np.array([2.0 if z in squared else 1.0 for z in names])
        rng = np.random.Generator(np.random.Philox(12345))
        for _ in range(64):
            mag = (scale * 10 ** rng.uniform(-1.5, 0.5, size=len(names))) ** power
            sign = np.where(power == 2.0, 1.0, rng.choice([-1.0, 1.0], size=len(names)))
            starts.append(mag * sign)
    fits = []
    for z0 in starts:
        res = least_squares(residual, z0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        z = res.x
        if any(z[names.index(q)] <= 0 for q in squared):
            continue
        fits.append((float(np.linalg.norm(res.fun)), z))
    if not fits:
        return []
    # keep only the best fits; local minima of an inconsistent system are not solutions
    best = min(r for r, _ in fits)
    tol = max(10 * best, 1e-9)
    sols = [dict(zip(names, z)) for r, z in fits if r <= tol]
    # deduplicate
    uniq: list[dict] = []
    for s in sols:
        if not any(all(abs(s[k] - u[k]) <= 1e-7 * max(1.0, abs(u[k])) for k in names) for u in uniq):
            uniq.append(s)
    return uniq


# ---------------------------------------------------------------------------
# end-to-end

@dataclass
class EstimationReport:
    parameters: list  # names
    magnitudes: dict
    signed: dict  # parameters whose sign is recovered
    truth: dict | None
    epsilon_percent: dict | None
    singular_values: list
    residual: float
    branch_margins: list
    coefficients: dict = field(default_factory=dict)
    method: str = ""
    not_estimable: list = field(default_factory=list)  # parameters absent from the transfer function

    def to_json(self) -> dict:
        params = []
        for p in self.parameters:
            d = {"name": p, "magnitude": self.magnitudes[p], "sign_recovered": p in self.signed}
            if p in self.signed:
                d["signed"] = self.signed[p]
            if self.truth is not None and p in self.truth:
                d["truth"] = float(self.truth[p])
                d["epsilon_percent"] = self.epsilon_percent[p]
            params.append(d)
        return {
            "parameters": params,
            "singular_values": [list(map(float, s)) for s in self.singular_values],
            "residual": self.residual,
            "branch_margins": self.branch_margins,
            "method": self.method,
            "coefficients": self.coefficients,
            "not_estimable": self.not_estimable,
        }


def estimable_parameters(model: ModelSpec, ps: PolySystem) -> list[str]:
    """Parameters that appear in the transfer function, in declaration order."""
    seen = {q for q, _ in ps.substitution.values()}
    return [p for p in model.parameters() if p in seen]


def _assemble(ps: PolySystem, v: Sequence[float], n: int):
    """Numerator/denominator vectors with only the structurally present coefficients."""
    num = np.zeros(n)
    den = np.zeros(n + 1)
    den[n] = 1.0
    for (side, k), c in ps.fixed:
        (num if side == "num" else den)[k] = float(c)
    for (side, k), x in zip(ps.labels, v):
        (num if side == "num" else den)[k] = float(x)
    return num, den


def estimate_parameters(
    model: ModelSpec,
    series: Sequence[TimeSeries],
    observables: Sequence[PauliString] | None = None,
    n: int | None = None,
    hankel_size: int | None = None,
    truth: dict | None = None,
    threshold: float = SPURIOUS_THRESHOLD,
    solver: str = "auto",
    cap: int = DEFAULT_REDUCTION_CAP,
    system: PolySystem | None = None,
    strict: bool = True,
) -> EstimationReport:
    """ERA on each series, sum of the estimated transfer functions, then the
    coefficient equations solved for the parameter magnitudes.

    ``system`` is the precomputed coefficient system (``poly_system_for``);
    pass it when estimating many series of the same model. With
    ``strict=False`` a non-positive squared parameter gives magnitude 0
    instead of raising, which is what a robustness sweep wants to count.
    """
    series = list(series)
    if observables is None:
        observables = model.default_observables(two=len(series) == 2 and model.family == "ExchangeTransverse")
    observables = list(observables)
    if len(series) != len(observables):
        raise ValueError(f"{len(observables)} observables but {len(series)} series")
    if model.family == "ExchangeTransverse" and len(observables) < 2:
        raise AmbiguousSolution("a single observable leaves the exchange chain in a field non-identifiable")
    ps = system if system is not None else poly_system_for(model, observables)
    if n is None:
        n = len(ps.source.denominator) - 1 if ps.source is not None else build(model, observables)[0].n
    estimable = estimable_parameters(model, ps)
    noiseless = all(not (ts.noise or {}).get("sigma", 0.0) for ts in series)
    reals: list[RealizationEst] = [realize_series(ts, n, hankel_size) for ts in series]
    tfs = [transfer_est(r, threshold) for r in reals]
    total = tfs[0]
    for t in tfs[1:]:
        total = total + t
    v = measured_coefficients(ps, list(total.numerator), list(total.denominator))
    num, den = _assemble(ps, v, n)
    signed: dict = {}
    if solver in ("auto", "closed") and _catalog_kind(model, observables) is not None:
        squares, signed = solve_catalog(model, observables, num, den, estimable)
        method = "closed-form continued fraction"
    else:
        sols = solve_generic(ps, v, cap=cap, exact=noiseless)
        if not sols:
            raise NoConsistentSolution("no admissible solution of the coefficient equations")
        classes = []
        for s in sols:
            sq = {ps.parameter_of(z): (val if z in ps.squared() else val * val) for z, val in s.items()}
            if not any(all(abs(sq[p] - c[p]) <= 1e-6 * max(1.0, abs(c[p])) for p in sq) for c in classes):
                classes.append(sq)
        if len(classes) > 1:
            raise AmbiguousSolution(f"{len(classes)} admissible magnitude assignments")
        squares = classes[0]
        unsq = [z for z in ps.zring.names if z not in ps.squared()]
        for z in unsq:
            vals = {np.sign(s[z]) for s in sols}
            if len(vals) == 1:
                signed[ps.parameter_of(z)] = sols[0][z]
        method = "exact shape-lemma solve with least-squares polish"
    bad = [p for p, x in squares.items() if not np.isfinite(x) or x <= 0]
    if bad and strict:
        raise NoConsistentSolution(f"non-positive squared parameter(s): {', '.join(sorted(bad))}")
    params = estimable
    mags = {p: float(np.sqrt(squares[p])) if p not in bad else 0.0 for p in params}
    # residual of the coefficient match at the estimate
    zpt = {}
    for z, (p, sq) in ps.substitution.items():
        zpt[z] = squares[p] if sq else signed.get(p, mags[p])
    resid = float(np.linalg.norm([f.evaluate({k: float(x) for k, x in zpt.items()}) - x for f, x in zip(ps.lhs, v)]))
    eps = None
    if truth is not None:
        eps = {p: relative_error_percent(float(truth[p]), mags[p]) for p in params if p in truth}
    return EstimationReport(
        parameters=params,
        not_estimable=[p for p in model.parameters() if p not in params],
        magnitudes=mags,
        signed={p: float(x) for p, x in signed.items()},
        truth={p: float(x) for p, x in truth.items()} if truth is not None else None,
        epsilon_percent=eps,
        singular_values=[r.singular_values for r in reals],
        residual=resid,
        branch_margins=[r.branch_margin for r in reals],
        coefficients={"labels": [f"{s}[s^{k}]" for s, k in ps.labels], "values": [float(x) for x in v]},
        method=method,
    )
