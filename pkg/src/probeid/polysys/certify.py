"""Certified real roots of square polynomial systems.

A numerical root is refined with exact residuals and then proven by the
Krawczyk test in rational interval arithmetic: if ``K(X)`` lies in the
interior of the box ``X``, the system has exactly one root in ``X``.
This gives exact existence statements without a Groebner basis, which is
what the identifiability test falls back on when the basis is too costly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .poly import MultiPoly, PolyRing, common_ring


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(p), max(p))

    def scale(self, c) -> "Interval":
        a, b = self.lo * c, self.hi * c
        return Interval(min(a, b), max(a, b))

    def __pow__(self, k: int) -> "Interval":
        if k == 0:
            return Interval(mpq(1), mpq(1))
        a, b = self.lo**k, self.hi**k
        if k % 2 == 0 and self.lo <= 0 <= self.hi:
            return Interval(mpq(0), max(a, b))
        return Interval(min(a, b), max(a, b))

    def strictly_inside(self, other: "Interval") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def disjoint(self, other: "Interval") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return Interval(-self.hi, -self.lo)
        return Interval(mpq(0), max(-self.lo, self.hi))

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)


def _interval_eval(f: MultiPoly, box: Sequence[Interval]) -> Interval:
    total = Interval(mpq(0), mpq(0))
    for m, c in f._terms.items():
        t = Interval(mpq(c), mpq(c))
        for X, k in zip(box, m):
            if k:
                t = t * X**k
        total = total + t
    return total


def _derivative(f: MultiPoly, i: int) -> MultiPoly:
    terms = {}
    for m, c in f._terms.items():
        if m[i]:
            mm = list(m)
            mm[i] -= 1
            terms[tuple(mm)] = c * m[i]
    return MultiPoly(f.ring, terms)


class _Compiled:
    """Float evaluation of a polynomial system and its Jacobian with numpy."""

    def __init__(self, polys: Sequence[MultiPoly]):
        rows, exps, coeffs = [], [], []
        for i, f in enumerate(polys):
            for m, c in f._terms.items():
                rows.append(i)
                exps.append(m)
                coeffs.append(float(c))
        self.neq = len(polys)
        self.rows = np.array(rows, dtype=int)
        self.E = np.array(exps, dtype=float).reshape(len(exps), -1)
        self.c = np.array(coeffs)
        M = self.E.shape[1]
        self.partials = []
        for j in range(M):
            mask = self.E[:, j] > 0
            Ej = self.E[mask].copy()
            Ej[:, j] -= 1
            self.partials.append((self.rows[mask], Ej, self.c[mask] * self.E[mask, j]))

    def values(self, z: np.ndarray) -> np.ndarray:
        mon = np.prod(z**self.E, axis=1)
        return np.bincount(self.rows, self.c * mon, minlength=self.neq)

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        J = np.zeros((self.neq, len(z)))
        for j, (rows, Ej, cj) in enumerate(self.partials):
            if len(rows):
                J[:, j] = np.bincount(rows, cj * np.prod(z**Ej, axis=1), minlength=self.neq)
        return J


@dataclass(frozen=True)
class CertifiedRoot:
    names: tuple  # ring gens (internal order)
    box: tuple  # Interval per name

    def interval(self, name: str) -> Interval:
        return self.box[self.names.index(name)]

    def approx(self) -> dict:
        return {n: X.mid for n, X in zip(self.names, self.box)}

    def overlaps(self, other: "CertifiedRoot") -> bool:
        return all(not a.disjoint(b) for a, b in zip(self.box, other.box))


def _dyadic(x: float) -> mpq:
    return mpq(float(x)) if np.isfinite(x) else mpq(0)


def _round_bits(v, bits: int = 200):
    """Nearest dyadic rational with about ``bits`` significant bits (keeps sizes bounded)."""
    if not v:
        return v
    e = bits - (abs(v.numerator).bit_length() - v.denominator.bit_length())
    scale = mpq(2) ** e
    t = v * scale
    return mpq(t.numerator // t.denominator) / scale


def krawczyk_certify(
    polys: Sequence[MultiPoly],
    approx: dict | Sequence[float],
    refine_steps: int = 4,
    radius: float = 1e-20,
) -> CertifiedRoot | None:
    """Prove that a square system has a unique root near ``approx``.

    ``approx`` is keyed by variable name (or ordered like ``ring.gens``).
    Returns the certified box, or None when the test fails (no root, a
    singular root, or an approximation too poor to contract).
    """
    ring: PolyRing = common_ring(polys)
    names = ring.gens
    M = len(names)
    if len(polys) != M:
        raise ValueError(f"Krawczyk test needs a square system, got {len(polys)} equations in {M} unknowns")
    if isinstance(approx, dict):
        x = np.array([float(approx[n]) for n in names])
    else:
        x = np.asarray(approx, dtype=float)
    comp = _Compiled(polys)
    Jf = comp.jacobian(x)
    try:
        Yf = np.linalg.inv(Jf)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(Yf)):
        return None
    Y = [[_dyadic(v) for v in row] for row in Yf]
    xq = [_dyadic(v) for v in x]
    point = lambda q: dict(zip(names, q))  # noqa: E731
    # Newton with exact residuals and a fixed float preconditioner
    for _ in range(refine_steps):
        F = [f.evaluate(point(xq)) for f in polys]
        step = [sum(Y[i][k] * F[k] for k in range(M)) for i in range(M)]
        xq = [xi - si for xi, si in zip(xq, step)]
        xq = [_round_bits(v) for v in xq]
    F = [f.evaluate(point(xq)) for f in polys]
    scale = [max(mpq(1), abs(v)) for v in xq]
    r = [mpq(radius) * s for s in scale]
    box = [Interval(xi - ri, xi + ri) for xi, ri in zip(xq, r)]
    dev = [Interval(-ri, ri) for ri in r]
    jac_polys = [[_derivative(f, j) for j in range(M)] for f in polys]
    JX = [[_interval_eval(jac_polys[i][j], box) for j in range(M)] for i in range(M)]
    for i in range(M):
        acc = Interval.point(xq[i] - sum(Y[i][k] * F[k] for k in range(M)))
        for j in range(M):
            # (I - Y J(X))_{ij}
            s = Interval(mpq(0), mpq(0))
            for k in range(M):
                s = s + JX[k][j].scale(Y[i][k])
            e = Interval(-s.hi, -s.lo)
            if i == j:
                e = Interval(e.lo + 1, e.hi + 1)
            acc = acc + e * dev[j]
        if not acc.strictly_inside(box[i]):
            return None
    return CertifiedRoot(tuple(names), tuple(box))


def numeric_real_roots(
    polys: Sequence[MultiPoly],
    rhs_scale: Sequence[float] | None = None,
    starts: Sequence[np.ndarray] = (),
    tol: float = 1e-10,
) -> list[np.ndarray]:
    """Real roots found by Levenberg-Marquardt from each start (deduplicated).

    Residuals are divided by ``rhs_scale`` so that equations of very
    different magnitude weigh alike. Coordinates follow ``ring.gens``.
    """
    from scipy.optimize import least_squares

    comp = _Compiled(polys)
    w = 1.0 / np.asarray(rhs_scale if rhs_scale is not None else np.ones(len(polys)), dtype=float)
    found: list[np.ndarray] = []
    for z0 in starts:
        with np.errstate(all="ignore"):
            res = least_squares(
                lambda z: comp.values(z) * w,
                np.asarray(z0, dtype=float),
                jac=lambda z: comp.jacobian(z) * w[:, None],
                method="lm",
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
                max_nfev=400,
            )
        if not np.all(np.isfinite(res.x)) or np.linalg.norm(res.fun) > tol:
            continue
        if any(np.allclose(res.x, f, rtol=1e-7, atol=1e-9) for f in found):
            continue
        found.append(res.x)
    return found
