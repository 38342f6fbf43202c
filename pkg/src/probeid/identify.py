"""Identifiability test at generic rational points, resource bounds, chain
timing and control transforms."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from ._rng import derive_seed, make_rng
from .models import ModelSpec
from .pauli import PauliString
from .polysys import (
    DEFAULT_REDUCTION_CAP,
    AlgebraCapExceeded,
    classify_shape,
    enumerate_real_solutions,
    groebner,
    is_zero_dimensional,
    radical_basis,
    shape_with_separating_form,
)
from .polysys.certify import CertifiedRoot, krawczyk_certify, numeric_real_roots
from .statespace import PolySystem, build, extract_poly_system, sum_transfer, transfer_function

IDENTIFIABLE = "Identifiable"
NON_IDENTIFIABLE = "NonIdentifiable"

# Term-operation budget for the exact path before falling back on a certified
# numerical search for a second solution (see _certificate).
DEFAULT_WORK_CAP = 5 * 10**7
CERTIFICATE_STARTS = 400


class DegeneratePoint(RuntimeError):
    """Trials kept disagreeing after all retries."""


@dataclass(frozen=True)
class IdentifiabilityVerdict:
    status: str
    cause: str | None = None
    detail: dict = field(default_factory=dict)
    sign_recovered: tuple = ()
    groebner_basis: tuple = ()
    shape: str | None = None
    sturm_count: int | None = None
    trials: int = 0
    parameters: tuple = ()
    radical_size: int | None = None  # number of elements of the reduced basis of the radical

    @property
    def identifiable(self) -> bool:
        return self.status == IDENTIFIABLE

    def key(self) -> tuple:
        """What must agree across trials."""
        return (self.status, self.cause, tuple(sorted(self.sign_recovered)))

    def to_json(self) -> dict:
        d = {
            "status": self.status,
            "sign_recovered": list(self.sign_recovered),
            "groebner_basis": list(self.groebner_basis),
            "sturm_count": self.sturm_count,
            "shape": self.shape,
            "trials": self.trials,
            "parameters": list(self.parameters),
        }
        if self.cause is not None:
            d["cause"] = self.cause
            d["cause_detail"] = self.detail
        return d


def _chain_precedence(model: ModelSpec, ps: PolySystem) -> list[str]:
    """Farthest-from-probe variables most significant; the nearest one is the pivot."""
    order = [p for p in model.chain_order() if p in {q for q, _ in ps.substitution.values()}]
    return [ps.z_of(p) for p in reversed(order)]


def random_point(model: ModelSpec, rng: np.random.Generator, bound: int = 100) -> dict:
    """Nonzero rationals with numerator and denominator up to ``bound``."""
    out = {}
    for p in model.parameters():
        num = int(rng.integers(1, bound + 1)) * (1 if rng.integers(0, 2) else -1)
        den = int(rng.integers(1, bound + 1))
        out[p] = mpq(num, den)
    return out


def _single_trial(
    model: ModelSpec, ps: PolySystem, theta: dict, cap: int, work_cap: int | None = None, seed: int = 0
) -> IdentifiabilityVerdict:
    try:
        return _exact_trial(model, ps, theta, cap, work_cap)
    except AlgebraCapExceeded:
        cert = _certificate(model, ps, theta, seed)
        if cert is None:
            raise
        return cert


def _exact_trial(model: ModelSpec, ps: PolySystem, theta: dict, cap: int, work_cap: int | None) -> IdentifiabilityVerdict:
    params = tuple(model.parameters())
    v = ps.v_values(theta)
    eqs = ps.equations(v)
    G = groebner(eqs, cap=cap, work_cap=work_cap)
    M = ps.M
    if G.is_unit():
        return IdentifiabilityVerdict(NON_IDENTIFIABLE, "NoSolution", groebner_basis=tuple(G.to_strings()), parameters=params)
    if len(G) < M or not is_zero_dimensional(G):
        return IdentifiabilityVerdict(
            NON_IDENTIFIABLE, "PositiveDimensional", {"basis_size": len(G), "variables": M},
            groebner_basis=tuple(G.to_strings()), shape="Other", parameters=params,
        )
    R = radical_basis(eqs, G=G, cap=cap, work_cap=work_cap)
    shape = classify_shape(R)
    weights: dict = {}
    if shape.kind not in ("Maximal", "ShapeLemma"):
        shape, weights = shape_with_separating_form(list(R.elements), cap=cap, work_cap=work_cap)
    sols = enumerate_real_solutions(shape)
    zstar = ps.z_values(theta)
    squared = set(ps.squared())
    unsquared = [z for z in ps.zring.names if z not in squared]
    admissible = [s for s in sols if all(s.sign(z) > 0 for z in squared)]
    if not any(_matches(s, zstar, weights) for s in admissible):
        raise AssertionError("the generating point is not among the admissible solutions")
    # solutions whose squared parameters all agree with the generating point
    orbit = []
    for flips in itertools.product((1, -1), repeat=len(unsquared)):
        pt = dict(zstar)
        for z, f in zip(unsquared, flips):
            pt[z] = pt[z] * f
        orbit.append(pt)
    classes_ok = all(any(_matches(s, pt, weights) for pt in orbit) for s in admissible)
    evidence = dict(groebner_basis=tuple(R.to_strings()), shape=str(shape), sturm_count=len(sols), parameters=params, radical_size=len(R))
    if not classes_ok:
        return IdentifiabilityVerdict(NON_IDENTIFIABLE, "MultipleRealSolutions", {"count": len(admissible)}, **evidence)
    signs = tuple(
        ps.parameter_of(z) for z in unsquared if len({s.sign(z) for s in admissible}) == 1
    )
    return IdentifiabilityVerdict(IDENTIFIABLE, None, {}, sign_recovered=signs, **evidence)


def _other_magnitudes(root: CertifiedRoot, zstar: dict, squared: set) -> bool:
    """True when the certified box excludes every sign flip of the generating point."""
    for z in root.names:
        X = root.interval(z) if z in squared else root.interval(z).abs()
        t = zstar[z] if z in squared else abs(zstar[z])
        if t < X.lo or t > X.hi:
            return True
    return False


def _certificate(model: ModelSpec, ps: PolySystem, theta: dict, seed: int) -> IdentifiabilityVerdict | None:
    """Non-identifiability without a Groebner basis.

    Numerical roots of the coefficient system are proven by the Krawczyk test;
    one certified admissible root whose magnitudes differ from the generating
    point is an exact proof of several admissible solutions. Only square
    systems qualify, and the reported count is a lower bound.
    """
    if len(ps.lhs) != ps.M:
        return None
    v = ps.v_values(theta)
    eqs = ps.equations(v)
    names = ps.zring.gens
    squared = set(ps.squared())
    zstar = ps.z_values(theta)
    scale = max(abs(float(x)) for x in theta.values())
    rhs = [max(abs(float(x)), 1e-300) for x in v]
    rng = make_rng(seed)
    certified: list[CertifiedRoot] = []
    for _batch in range(CERTIFICATE_STARTS // 20):
        starts = [
            np.array([rng.uniform(0, 4) * scale**2 if z in squared else rng.uniform(-2, 2) * scale for z in names])
            for _ in range(20)
        ]
        for x in numeric_real_roots(eqs, rhs, starts):
            if any(x[names.index(z)] <= 0 for z in squared):
                continue
            root = krawczyk_certify(eqs, x)
            if root is None or any(root.interval(z).lo <= 0 for z in squared):
                continue
            if not any(root.overlaps(c) for c in certified):
                certified.append(root)
        if any(_other_magnitudes(c, zstar, squared) for c in certified):
            break
    if not any(_other_magnitudes(c, zstar, squared) for c in certified):
        return None
    contains_star = any(all(c.interval(z).lo <= zstar[z] <= c.interval(z).hi for z in names) for c in certified)
    count = len(certified) + (0 if contains_star else 1)
    params = tuple(model.parameters())
    sols = [
        {ps.parameter_of(z) + ("^2" if z in squared else ""): round(x, 12) for z, x in sorted(c.approx().items())}
        for c in certified
    ]
    detail = {"count": count, "count_is_lower_bound": True, "method": "Krawczyk-certified roots", "certified": sols}
    return IdentifiabilityVerdict(NON_IDENTIFIABLE, "MultipleRealSolutions", detail, shape="Unknown", parameters=params)


def _matches(sol, point: dict, weights: dict) -> bool:
    if weights:
        point = dict(point)
        point[sol.pivot] = sum(w * point[z] for z, w in weights.items())
    return sol.contains_point(point)


def accessible_check(model: ModelSpec, observables: Sequence[PauliString]):
    systems = build(model, observables)
    present = systems[0].parameters_present()
    missing = [p for p in model.parameters() if p not in present]
    return systems, missing


def test_identifiability(
    model: ModelSpec,
    observables: Sequence[PauliString] | None = None,
    trials: int = 2,
    seed: int = 0,
    cap: int = DEFAULT_REDUCTION_CAP,
    retries: int = 5,
    work_cap: int | None = DEFAULT_WORK_CAP,
) -> IdentifiabilityVerdict:
    """Decide identifiability from the probe observables.

    The accessible set is checked first; then the coefficient system is
    solved exactly at ``trials`` random rational points, whose verdicts must
    agree (a disagreement is treated as a degenerate draw and retried).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    observables = list(observables) if observables is not None else model.default_observables()
    systems, missing = accessible_check(model, observables)
    params = tuple(model.parameters())
    if missing:
        return IdentifiabilityVerdict(NON_IDENTIFIABLE, "AccessibleSetIncomplete", {"missing": missing}, parameters=params)
    tf = sum_transfer([transfer_function(s) for s in systems])
    ps = extract_poly_system(tf, model.parameters())
    absent = [p for p in params if p not in {q for q, _ in ps.substitution.values()}]
    if absent:
        return IdentifiabilityVerdict(NON_IDENTIFIABLE, "PositiveDimensional", {"absent_from_transfer_function": absent}, parameters=params)
    ps = ps.with_order(_chain_precedence(model, ps))
    rng = make_rng(seed)
    for attempt in range(retries + 1):
        verdicts = [
            _single_trial(model, ps, random_point(model, rng), cap, work_cap, seed=derive_seed(seed, attempt * trials + k))
            for k in range(trials)
        ]
        if len({v.key() for v in verdicts}) == 1:
            return replace(verdicts[0], trials=trials)
    raise DegeneratePoint(f"trial verdicts disagreed after {retries} retries")


# resource bounds ------------------------------------------------------------

@dataclass(frozen=True)
class ResourceBounds:
    n: int
    observables: int
    lambda_min: int  # total over observables
    lambda_per_observable: int
    omega_max: float
    dt_max: float
    t_tot_max: float
    t_dead: float = 0.0

    def t_id(self, t_dead: float | None = None, lam: int | None = None, dt: float | None = None) -> float:
        """Identification time ``((lam - 1)/2 dt + t_dead) lam``."""
        lam = self.lambda_per_observable if lam is None else lam
        dt = self.dt_max if dt is None else dt
        t_dead = self.t_dead if t_dead is None else t_dead
        return ((lam - 1) / 2 * dt + t_dead) * lam

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "observables": self.observables,
            "lambda_min": self.lambda_min,
            "lambda_min_per_observable": self.lambda_per_observable,
            "omega_max": self.omega_max,
            "dt_max": self.dt_max,
            "t_tot_max": self.t_tot_max,
            "t_dead": self.t_dead,
            "t_id": self.t_id(),
        }


def omega_from_prior(model: ModelSpec, theta_max: float, observables: Sequence[PauliString] | None = None) -> float:
    """Spectral radius of the system matrix with every parameter at ``theta_max``."""
    sys = build(model, observables)[0]
    A = sys.numeric({p: theta_max for p in model.parameters()})
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def resource_bounds(
    model: ModelSpec,
    observables: Sequence[PauliString] | None = None,
    omega_max: float | None = None,
    theta_max: float | None = None,
    t_dead: float = 0.0,
) -> ResourceBounds:
    observables = list(observables) if observables is not None else model.default_observables()
    n = build(model, observables)[0].n
    if omega_max is None:
        if theta_max is None:
            raise ValueError("either omega_max or a theta_max prior is required")
        omega_max = omega_from_prior(model, theta_max, observables)
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    lam = 2 * n
    return ResourceBounds(
        n=n,
        observables=len(observables),
        lambda_min=lam * len(observables),
        lambda_per_observable=lam,
        omega_max=float(omega_max),
        dt_max=math.pi / omega_max,
        t_tot_max=(2 * n - 1) * math.pi / omega_max,
        t_dead=t_dead,
    )


@dataclass(frozen=True)
class ChainTiming:
    N: int
    J: float
    a: float
    L: float
    omega_max: float
    v_g: float
    tau: float
    t_tot: float
    ratio: float  # t_tot / (pi N / J)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def chain_timing(N: int, J: float, a: float = 1.0) -> ChainTiming:
    """Uniform exchange chain: top one-excitation frequency, group velocity, return time."""
    if N < 2 or J <= 0:
        raise ValueError("need N >= 2 and J > 0")
    omega = 2 * J * math.cos(math.pi / (N + 1))
    t_tot = (2 * N - 1) * math.pi / omega
    return ChainTiming(
        N=N, J=J, a=a, L=(N - 1) * a, omega_max=omega, v_g=2 * J * a, tau=(N - 1) / J,
        t_tot=t_tot, ratio=t_tot / (math.pi * N / J),
    )


# control transforms ---------------------------------------------------------

CONTROL_TRANSFORMS = ("IsingToExchange", "SpinEchoRemoveField")


def apply_control_transform(model: ModelSpec, kind: str) -> ModelSpec:
    """Effective model under fast periodic control (valid for J_k dt << 1)."""
    meta = (("control", kind), ("validity", "J_k*delta_t << 1"))
    if kind == "IsingToExchange" and model.family == "IsingNoField":
        return ModelSpec("ExchangeNoField", model.N, model.axes, metadata=meta)
    if kind == "SpinEchoRemoveField" and model.family == "IsingTransverse":
        return ModelSpec("IsingNoField", model.N, model.axes, metadata=meta)
    if kind == "SpinEchoRemoveField" and model.family == "ExchangeTransverse":
        return ModelSpec("ExchangeNoField", model.N, model.axes, metadata=meta)
    raise ValueError(f"control transform {kind} does not apply to {model.family}")
