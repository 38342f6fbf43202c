"""Symbolic state-space realization, transfer function and coefficient equations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .models import ModelSpec
from .pauli import AccessibleSet, PauliString, accessible_set, structure_constants
from .polysys import MultiPoly, PolyRing


@dataclass(frozen=True)
class SymbolicSystem:
    """``dx/dt = A x``, ``y = C x`` with ``A`` linear in the parameters."""

    model: ModelSpec
    basis: AccessibleSet
    ring: PolyRing  # parameters theta
    A: tuple  # n x n tuple of tuples of MultiPoly
    x0: tuple  # rationals
    C: tuple  # rationals
    observable: PauliString

    @property
    def n(self) -> int:
        return len(self.basis)

    def parameters_present(self) -> set[str]:
        out = set()
        for row in self.A:
            for e in row:
                out.update(e.variables())
        return out

    def numeric(self, theta: dict) -> np.ndarray:
        """``A`` at concrete parameter values (floats)."""
        vals = {p: float(theta[p]) for p in self.ring.names}
        n = self.n
        out = np.zeros((n, n))
        for k in range(n):
            for l in range(n):
                e = self.A[k][l]
                if e:
                    out[k, l] = sum(float(c) * vals[self.ring.gens[m.index(1)]] for m, c in e._terms.items())
        return out

    def exact(self, theta: dict) -> list[list]:
        """``A`` at rational parameter values."""
        return [[e.evaluate(theta) if e else mpq(0) for e in row] for row in self.A]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "basis": self.basis.to_strings(),
            "observable": str(self.observable),
            "A": [[e.to_str() for e in row] for row in self.A],
            "x0": [str(Fraction(int(c.numerator), int(c.denominator))) for c in self.x0],
            "C": [str(Fraction(int(c.numerator), int(c.denominator))) for c in self.C],
        }


def parameter_ring(model: ModelSpec) -> PolyRing:
    return PolyRing(model.parameters())


def build(model: ModelSpec, observables: Sequence[PauliString] | None = None, probe_sign: int = 1) -> list[SymbolicSystem]:
    """One realization per observable, all sharing the same basis and ``A``.

    The basis is the accessible set generated by all observables together.
    The probe is prepared in the +1 eigenstate of the first observable
    (``probe_sign=-1`` picks the other one) with the rest of the chain
    maximally mixed, so ``x0`` is the indicator of that observable; each
    branch's ``C`` selects its own observable.
    """
    if observables is None:
        observables = model.default_observables()
    observables = list(observables)
    terms = model.terms()
    G = accessible_set(terms, observables)
    V = structure_constants(terms, G)
    ring = parameter_ring(model)
    n = len(G)
    entries: list[list[dict]] = [[{} for _ in range(n)] for _ in range(n)]
    for (m, k, l), v in V.items():
        p = terms[m].parameter
        e = [0] * ring.nvars
        e[ring.index[p]] = 1
        key = tuple(e)
        d = entries[k][l]
        d[key] = d.get(key, 0) + mpq(v.numerator, v.denominator)
    A = tuple(tuple(MultiPoly(ring, {m: c for m, c in d.items() if c}) for d in row) for row in entries)
    out = []
    i0 = G.index(observables[0])
    x0 = tuple(mpq(probe_sign if j == i0 else 0) for j in range(n))
    for o in observables:
        i = G.index(o)
        C = tuple(mpq(1 if j == i else 0) for j in range(n))
        out.append(SymbolicSystem(model, G, ring, A, x0, C, o))
    return out


@dataclass(frozen=True)
class TransferFunctionSym:
    """``T(s) = num(s) / den(s)``; coefficient lists ascending in ``s``."""

    ring: PolyRing
    numerator: tuple
    denominator: tuple

    @property
    def order(self) -> int:
        return len(self.denominator) - 1

    def evaluate(self, theta: dict) -> tuple[list, list]:
        num = [c.evaluate(theta) if c else mpq(0) for c in self.numerator]
        den = [c.evaluate(theta) if c else mpq(0) for c in self.denominator]
        return num, den

    def to_json(self) -> dict:
        return {
            "numerator": [c.to_str() for c in self.numerator],
            "denominator": [c.to_str() for c in self.denominator],
        }


def faddeev_leverrier(A: Sequence[Sequence[MultiPoly]], ring: PolyRing):
    """Characteristic polynomial and adjugate coefficients of ``sI - A``.

    Returns ``(c, M)`` with ``det(sI - A) = sum_k c[k] s^k`` and
    ``adj(sI - A) = sum_{k=1}^{n} M[k] s^(n-k)``.
    """
    n = len(A)
    sparse = [[(l, A[k][l]) for l in range(n) if A[k][l]] for k in range(n)]
    zero = ring.zero
    c = [zero] * (n + 1)
    c[n] = ring.one
    M_prev = [[zero] * n for _ in range(n)]
    Ms = [None]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        M = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero
                for l, a in sparse[i]:
                    if M_prev[l][j]:
                        acc = acc + a * M_prev[l][j]
                if i == j:
                    acc = acc + c[n - k + 1]
                row.append(acc)
            M.append(row)
        Ms.append(M)
        # c_{n-k} = -tr(A M_k) / k
        tr = zero
        for i in range(n):
            for l, a in sparse[i]:
                if M[l][i]:
                    tr = tr + a * M[l][i]
        c[n - k] = tr * mpq(-1, k)
        M_prev = M
    return c, Ms


def transfer_function(sys: SymbolicSystem) -> TransferFunctionSym:
    n = sys.n
    c, Ms = faddeev_leverrier(sys.A, sys.ring)
    zero = sys.ring.zero
    num = [zero] * n
    Cidx = [i for i, v in enumerate(sys.C) if v]
    Xidx = [j for j, v in enumerate(sys.x0) if v]
    for k in range(1, n + 1):
        acc = zero
        for i in Cidx:
            for j in Xidx:
                if Ms[k][i][j]:
                    acc = acc + Ms[k][i][j] * (sys.C[i] * sys.x0[j])
        num[n - k] = acc
    return TransferFunctionSym(sys.ring, tuple(num), tuple(c))


def sum_transfer(tfs: Sequence[TransferFunctionSym]) -> TransferFunctionSym:
    """Sum of transfer functions that share a denominator."""
    tfs = list(tfs)
    if not tfs:
        raise ValueError("nothing to sum")
    den = tfs[0].denominator
    for t in tfs[1:]:
        if t.denominator != den or t.ring != tfs[0].ring:
            raise ValueError("transfer functions do not share a realization")
    num = list(tfs[0].numerator)
    for t in tfs[1:]:
        num = [a + b for a, b in zip(num, t.numerator)]
    return TransferFunctionSym(tfs[0].ring, tuple(num), den)


def model_transfer_function(model: ModelSpec, observables: Sequence[PauliString] | None = None) -> TransferFunctionSym:
    return sum_transfer([transfer_function(s) for s in build(model, observables)])


# coefficient equations ------------------------------------------------------

@dataclass(frozen=True)
class PolySystem:
    """Equations ``lhs_i(z) = v_i`` from matching ``T(s)`` coefficients.

    ``labels[i]`` is ``("num" | "den", power of s)``. ``substitution`` maps
    each z variable to ``(parameter, squared?)``.
    """

    zring: PolyRing
    lhs: tuple
    labels: tuple
    substitution: dict
    fixed: tuple = field(default=())  # (label, constant value) of parameter-free coefficients
    source: TransferFunctionSym | None = field(default=None, compare=False)

    @property
    def M(self) -> int:
        return self.zring.nvars

    def squared(self) -> list[str]:
        return [z for z, (_, sq) in self.substitution.items() if sq]

    def parameter_of(self, z: str) -> str:
        return self.substitution[z][0]

    def z_of(self, parameter: str) -> str:
        for z, (p, _) in self.substitution.items():
            if p == parameter:
                return z
        raise KeyError(parameter)

    def z_values(self, theta: dict) -> dict:
        """Map a parameter point to z coordinates (exact for rationals)."""
        return {z: (theta[p] ** 2 if sq else theta[p]) for z, (p, sq) in self.substitution.items()}

    def v_values(self, theta: dict) -> list:
        z = self.z_values(theta)
        return [f.evaluate(z) for f in self.lhs]

    def with_order(self, most_significant_first: Sequence[str]) -> "PolySystem":
        """The same equations in a ring with a different lex precedence."""
        R = PolyRing.with_precedence(self.zring.names, most_significant_first)
        return PolySystem(R, tuple(R.convert(f) for f in self.lhs), self.labels, self.substitution, self.fixed, self.source)

    def equations(self, rhs: Sequence) -> list[MultiPoly]:
        """Instantiate ``lhs_i - v_i`` at rational right-hand sides."""
        if len(rhs) != len(self.lhs):
            raise ValueError(f"expected {len(self.lhs)} measured coefficients, got {len(rhs)}")
        return [f - mpq(v) for f, v in zip(self.lhs, rhs)]

    def symbolic(self) -> tuple[PolyRing, list[MultiPoly]]:
        """Equations ``lhs_i - v_i`` with the v's as trailing ring symbols."""
        vnames = [f"v{i + 1}" for i in range(len(self.lhs))]
        R = PolyRing.with_precedence(list(self.zring.names) + vnames, list(self.zring.gens) + vnames)
        return R, [R.convert(f) - R.gen(v) for f, v in zip(self.lhs, vnames)]

    def to_json(self) -> dict:
        return {
            "variables": {z: (f"{p}^2" if sq else p) for z, (p, sq) in self.substitution.items()},
            "equations": [f"{f.to_str()} = v{i + 1}" for i, f in enumerate(self.lhs)],
            "labels": [f"{side}[s^{k}]" for side, k in self.labels],
        }


def _coefficient_list(tf: TransferFunctionSym):
    items = []
    for k, c in enumerate(tf.numerator):
        items.append((("num", k), c))
    for k, c in enumerate(tf.denominator[:-1]):
        items.append((("den", k), c))
    return items


def extract_poly_system(tf: TransferFunctionSym, parameters: Sequence[str] | None = None) -> PolySystem:
    """Equate the coefficients of ``T(s)`` with measured constants.

    Identically zero coefficients are dropped, parameter-free ones are kept
    aside as consistency checks, and every parameter that only occurs with
    even exponents is replaced by ``z = theta^2``.
    """
    ring = tf.ring
    if tf.denominator[-1] != ring.one:
        raise ValueError("denominator must be monic")
    items = [(lab, c) for lab, c in _coefficient_list(tf) if c]
    fixed = tuple((lab, c.evaluate({p: mpq(0) for p in ring.names})) for lab, c in items if c.is_constant())
    items = [(lab, c) for lab, c in items if not c.is_constant()]
    params = list(parameters) if parameters is not None else list(ring.names)
    used = set()
    for _, c in items:
        used.update(c.variables())
    params = [p for p in params if p in used]
    even = {}
    for p in params:
        i = ring.index[p]
        even[p] = all(m[i] % 2 == 0 for _, c in items for m in c._terms)
    znames = [f"z{k + 1}" for k in range(len(params))]
    zring = PolyRing(znames)
    subst = {z: (p, even[p]) for z, p in zip(znames, params)}
    lhs = []
    for _, c in items:
        terms = {}
        for m, v in c._terms.items():
            e = [0] * zring.nvars
            for z, p in zip(znames, params):
                k = m[ring.index[p]]
                e[zring.index[z]] = k // 2 if even[p] else k
            terms[tuple(e)] = v
        lhs.append(MultiPoly(zring, terms))
    return PolySystem(zring, tuple(lhs), tuple(lab for lab, _ in items), subst, fixed, tf)


def poly_system_for(model: ModelSpec, observables: Sequence[PauliString] | None = None) -> PolySystem:
    tf = model_transfer_function(model, observables)
    return extract_poly_system(tf, model.parameters())


def measured_coefficients(system: PolySystem, numerator: Sequence, denominator: Sequence) -> list:
    """Pick the v's out of (monic) numerator/denominator coefficient vectors."""
    out = []
    for side, k in system.labels:
        vec = numerator if side == "num" else denominator
        out.append(vec[k] if k < len(vec) else 0)
    return out
