"""Dense univariate polynomials over Q, squarefree parts, Sturm sequences and
certified real-root isolation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .poly import MultiPoly, as_rational, format_rational

DEFAULT_ISOLATION_WIDTH = mpq(1, 10**12)


@dataclass(frozen=True)
class UniPoly:
    """``coeffs[k]`` is the coefficient of ``var^k``; trailing zeros are stripped."""

    var: str
    coeffs: tuple

    def __init__(self, var: str, coeffs: Sequence):
        cs = [as_rational(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_multi(cls, f: MultiPoly, var: str) -> "UniPoly":
        i = f.ring.index[var]
        cs: dict[int, object] = {}
        for m, c in f._terms.items():
            if any(k for j, k in enumerate(m) if j != i):
                raise ValueError(f"{f} is not univariate in {var}")
            cs[m[i]] = c
        deg = max(cs, default=-1)
        return cls(var, [cs.get(k, 0) for k in range(deg + 1)])

    def to_multi(self, ring) -> MultiPoly:
        i = ring.index[self.var]
        terms = {}
        for k, c in enumerate(self.coeffs):
            if c:
                e = [0] * ring.nvars
                e[i] = k
                terms[tuple(e)] = c
        return MultiPoly(ring, terms)

    # structure ---------------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def lc(self):
        return self.coeffs[-1]

    def monic(self) -> "UniPoly":
        if not self.coeffs:
            return self
        inv = mpq(1) / self.lc
        return UniPoly(self.var, [c * inv for c in self.coeffs])

    def derivative(self) -> "UniPoly":
        return UniPoly(self.var, [k * c for k, c in enumerate(self.coeffs)][1:])

    # arithmetic ----------------------------------------------------------------
    def _same(self, other: "UniPoly"):
        if self.var != other.var:
            raise ValueError(f"variable mismatch {self.var} vs {other.var}")

    def __add__(self, other: "UniPoly") -> "UniPoly":
        self._same(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (mpq(0),) * (n - len(self.coeffs))
        b = other.coeffs + (mpq(0),) * (n - len(other.coeffs))
        return UniPoly(self.var, [x + y for x, y in zip(a, b)])

    def __neg__(self):
        return UniPoly(self.var, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            c = as_rational(other)
            return UniPoly(self.var, [x * c for x in self.coeffs])
        self._same(other)
        if not self.coeffs or not other.coeffs:
            return UniPoly(self.var, [])
        out = [mpq(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(self.var, out)

    __rmul__ = __mul__

    def divmod(self, other: "UniPoly"):
        self._same(other)
        if not other.coeffs:
            raise ZeroDivisionError("division by the zero polynomial")
        r = list(self.coeffs)
        dq = len(r) - len(other.coeffs)
        if dq < 0:
            return UniPoly(self.var, []), self
        q = [mpq(0)] * (dq + 1)
        inv = mpq(1) / other.lc
        for k in range(dq, -1, -1):
            c = r[k + other.degree] * inv
            q[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    r[k + j] -= c * b
        return UniPoly(self.var, q), UniPoly(self.var, r[: other.degree])

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __call__(self, x):
        """Horner evaluation; exact for rational ``x``."""
        acc = mpq(0) if not isinstance(x, (float, complex, np.floating)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if not isinstance(acc, float) else float(c))
        return acc

    def sign_at(self, x) -> int:
        v = self(as_rational(x))
        return (v > 0) - (v < 0)

    def float_coeffs(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def to_str(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mag = format_rational(abs(c))
            mono = "" if k == 0 else (self.var if k == 1 else f"{self.var}^{k}")
            body = mag if not mono else (mono if mag == "1" else f"{mag} * {mono}")
            parts.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    __str__ = to_str


def gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd by the Euclidean algorithm."""
    while b:
        a, b = b, a % b
    return a.monic()


def squarefree_part(h: UniPoly) -> UniPoly:
    """``h / gcd(h, h')`` made monic: same roots, all simple."""
    if h.is_zero():
        raise ValueError("squarefree part of the zero polynomial")
    if h.degree == 0:
        return UniPoly(h.var, [1])
    g = gcd(h, h.derivative())
    return (h // g).monic()


def is_squarefree(h: UniPoly) -> bool:
    return gcd(h, h.derivative()).degree == 0


# Sturm --------------------------------------------------------------------

@dataclass(frozen=True)
class SturmSequence:
    polys: tuple

    def variations_at(self, x) -> int:
        """Sign changes at rational ``x``; ``None`` for -inf, ``"inf"`` for +inf."""
        signs = []
        for p in self.polys:
            if x is None:
                s = _sign(p.lc) * (-1 if p.degree % 2 else 1)
            elif isinstance(x, str):
                s = _sign(p.lc)
            else:
                s = p.sign_at(x)
            if s:
                signs.append(s)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def sturm_sequence(p: UniPoly) -> SturmSequence:
    if p.is_zero():
        raise ValueError("Sturm sequence of the zero polynomial")
    seq = [p, p.derivative()]
    while seq[-1]:
        seq.append(-(seq[-2] % seq[-1]))
    return SturmSequence(tuple(s for s in seq if s))


def sturm_count(p: UniPoly, interval=(None, None), seq: SturmSequence | None = None) -> int:
    """Distinct real roots of a squarefree ``p`` in ``(lo, hi]``.

    ``None`` bounds stand for -inf / +inf.
    """
    if p.is_zero():
        raise ValueError("sturm_count of the zero polynomial")
    if p.degree == 0:
        return 0
    seq = seq or sturm_sequence(p)
    lo, hi = interval
    vlo = seq.variations_at(None if lo is None else as_rational(lo))
    vhi = seq.variations_at("inf" if hi is None else as_rational(hi))
    return vlo - vhi


def cauchy_bound(p: UniPoly):
    """All roots lie strictly inside (-B, B)."""
    lc = abs(p.lc)
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=mpq(0))


@dataclass(frozen=True)
class RootInterval:
    """Isolating interval ``(lo, hi]`` containing exactly one root; ``lo == hi`` if exact."""

    lo: object
    hi: object

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def __float__(self):
        return float(self.mid)


def isolate_real_roots(p: UniPoly, width=DEFAULT_ISOLATION_WIDTH) -> list[RootInterval]:
    """Certified isolation of the real roots of a squarefree polynomial, ascending."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    if p.degree == 0:
        return []
    width = as_rational(width)
    seq = sturm_sequence(p)
    B = cauchy_bound(p)
    out: list[RootInterval] = []
    stack = [(-B, B, sturm_count(p, (-B, B), seq))]
    while stack:
        lo, hi, k = stack.pop()
        if k == 0:
            continue
        if k == 1:
            out.append(refine_root(p, RootInterval(lo, hi), width, seq))
            continue
        mid = (lo + hi) / 2
        kl = sturm_count(p, (lo, mid), seq)
        stack.append((mid, hi, k - kl))
        stack.append((lo, mid, kl))
    out.sort(key=lambda r: r.lo)
    return out


def refine_root(p: UniPoly, iv: RootInterval, width, seq: SturmSequence | None = None) -> RootInterval:
    """Bisect an isolating interval down to ``width``."""
    lo, hi = iv.lo, iv.hi
    if lo == hi:
        return iv
    width = as_rational(width)
    if not p(hi):
        return RootInterval(hi, hi)
    while hi - lo > width:
        mid = (lo + hi) / 2
        v = p(mid)
        if not v:
            return RootInterval(mid, mid)
        # root in (lo, mid] iff sign changes between mid and hi, or p(lo) is of the other sign
        if _sign(v) != p.sign_at(hi):
            lo = mid
        else:
            hi = mid
    return RootInterval(lo, hi)


def sign_at_root(q: UniPoly, p: UniPoly, iv: RootInterval) -> int:
    """Exact sign of ``q`` at the unique root of squarefree ``p`` in ``iv``."""
    if iv.exact:
        return q.sign_at(iv.lo)
    if q.is_zero():
        return 0
    g = gcd(p, q)
    if g.degree > 0 and sturm_count(g, (iv.lo, iv.hi)) == 1:
        return 0
    qs = squarefree_part(q)
    seq = sturm_sequence(qs) if qs.degree > 0 else None
    lo, hi = iv.lo, iv.hi
    while seq is not None and sturm_count(qs, (lo, hi), seq) > 0:
        mid = (lo + hi) / 2
        v = p(mid)
        if not v:
            return q.sign_at(mid)
        if _sign(v) != p.sign_at(hi):
            lo = mid
        else:
            hi = mid
    return q.sign_at(hi)


def companion_real_root_count(p: UniPoly, imag_tol: float = 1e-9) -> int:
    """Numeric oracle: real eigenvalues of the companion matrix."""
    if p.degree <= 0:
        return 0
    c = p.monic().float_coeffs()
    n = p.degree
    M = np.zeros((n, n))
    M[1:, :-1] = np.eye(n - 1)
    M[:, -1] = -c[:-1]
    ev = np.linalg.eigvals(M)
    return int(np.sum(np.abs(ev.imag) <= imag_tol * max(1.0, np.max(np.abs(ev)))))


def rational_in_interval(lo, hi):
    """Simplest rational in the closed interval ``[lo, hi]`` (Stern-Brocot)."""
    lo, hi = as_rational(lo), as_rational(hi)
    if lo > hi:
        lo, hi = hi, lo
    if lo <= 0 <= hi:
        return mpq(0)
    if hi < 0:
        return -rational_in_interval(-hi, -lo)
    fl = mpq(lo.numerator // lo.denominator)
    if fl == lo:
        return lo
    if fl + 1 <= hi:
        return fl + 1
    return fl + 1 / rational_in_interval(1 / (hi - fl), 1 / (lo - fl))
