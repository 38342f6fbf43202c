"""Division, S-polynomials, Buchberger's algorithm and reduced bases (lex)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import gcd, lcm, mpq, mpz

from .poly import (
    MultiPoly,
    PolyRing,
    RingMismatch,
    common_ring,
    coprime,
    divides,
    lcm_monomial,
    monomial_quotient,
)

DEFAULT_REDUCTION_CAP = 10**6


class AlgebraCapExceeded(RuntimeError):
    """Buchberger hit its reduction cap (or term-work budget) before the pair
    queue emptied."""

    def __init__(self, reductions: int, cap: int, kind: str = "reductions"):
        if kind == "reductions":
            msg = f"Groebner computation exceeded {cap} pair reductions ({reductions} done)"
        else:
            msg = f"Groebner computation exceeded its budget of {cap} term operations ({reductions} pair reductions done)"
        super().__init__(msg)
        self.reductions = reductions
        self.cap = cap
        self.kind = kind


class NotReduced(ValueError):
    pass


@dataclass(frozen=True)
class Ideal:
    generators: tuple

    def __init__(self, generators: Sequence[MultiPoly]):
        gens = tuple(generators)
        if not gens:
            raise ValueError("an ideal needs at least one generator")
        common_ring(gens)
        object.__setattr__(self, "generators", gens)

    @property
    def ring(self) -> PolyRing:
        return self.generators[0].ring


@dataclass(frozen=True)
class GroebnerBasis:
    elements: tuple
    ring: PolyRing
    reduced: bool = False
    reductions: int = field(default=0, compare=False)

    @property
    def order(self):
        return self.ring.order

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def is_unit(self) -> bool:
        return any(g.is_constant() and g for g in self.elements)

    def leading_monomials(self) -> list[tuple]:
        return [g.LM() for g in self.elements]

    def to_strings(self) -> list[str]:
        return [g.to_str() for g in self.elements]

    def reduce(self, f: MultiPoly) -> MultiPoly:
        return normal_form(f, self.elements)

    def contains(self, f: MultiPoly) -> bool:
        return normal_form(f, self.elements).is_zero()


# division ----------------------------------------------------------------

def divide_multi(f: MultiPoly, divisors: Sequence[MultiPoly]):
    """Multivariate division: return ``(quotients, remainder)``.

    Terms are processed from the top down; the first divisor (in the given
    order) whose leading monomial divides the current term is used.
    """
    ring = f.ring
    for d in divisors:
        if d.ring != ring:
            raise RingMismatch(f"{d.ring} vs {ring}")
        if d.is_zero():
            raise ZeroDivisionError("zero divisor in divide_multi")
    lead = [(d.LM(), d.LC()) for d in divisors]
    quotients: list[dict] = [{} for _ in divisors]
    p = dict(f._terms)
    rem: dict = {}
    while p:
        m = max(p)
        c = p[m]
        for i, (lm, lc) in enumerate(lead):
            if divides(lm, m):
                q = monomial_quotient(m, lm)
                k = c / lc
                quotients[i][q] = quotients[i].get(q, 0) + k
                _sub_scaled(p, divisors[i]._terms, q, k)
                break
        else:
            rem[m] = c
            del p[m]
    qs = [MultiPoly(ring, {m: c for m, c in q.items() if c}) for q in quotients]
    return qs, MultiPoly(ring, rem)


def _sub_scaled(p: dict, g: dict, shift: tuple, k) -> None:
    """In place: p -= k * x^shift * g."""
    for m, c in g.items():
        mm = tuple(a + b for a, b in zip(m, shift))
        v = p.get(mm, 0) - k * c
        if v:
            p[mm] = v
        else:
            p.pop(mm, None)


def _normal_form_terms(p: dict, basis: Sequence[tuple]) -> dict:
    """Full reduction of the term dict ``p`` by ``[(LM, terms)]`` of monic polys."""
    p = dict(p)
    rem: dict = {}
    while p:
        m = max(p)
        c = p[m]
        for lm, g in basis:
            if divides(lm, m):
                _sub_scaled(p, g, monomial_quotient(m, lm), c)
                break
        else:
            rem[m] = c
            del p[m]
    return rem


def _primitive(p: dict) -> dict:
    """Scale a rational term dict to coprime integers with positive leading coefficient."""
    den = mpz(1)
    for c in p.values():
        den = lcm(den, mpq(c).denominator)
    ints = {m: mpz(c * den) for m, c in p.items()}
    g = mpz(0)
    for c in ints.values():
        g = gcd(g, c)
        if g == 1:
            break
    if ints[max(ints)] < 0:
        g = -g
    return {m: c // g for m, c in ints.items()}


class _WorkExhausted(Exception):
    pass


def _nf_int(p: dict, basis: Sequence[tuple], budget: list | None = None) -> dict:
    """Fraction-free full reduction over Z: result is a nonzero multiple of the
    rational normal form. ``basis`` holds ``(LM, integer terms, LC, limbs)``
    where ``limbs`` is the size of the largest coefficient in 64-bit words.

    ``budget`` is a one-element list of remaining work, decremented in place
    by the number of limb operations (terms times coefficient sizes).
    """
    p = dict(p)
    rem: dict = {}
    steps = 0
    while p:
        m = max(p)
        c = p[m]
        for lm, g, lc, limbs in basis:
            if divides(lm, m):
                d = gcd(c, lc)
                a, b = lc // d, c // d
                if a != 1:
                    for k in p:
                        p[k] *= a
                    for k in rem:
                        rem[k] *= a
                _sub_scaled(p, g, monomial_quotient(m, lm), b)
                steps += 1
                if budget is not None:
                    wb = b.bit_length() // 64 + 1
                    budget[0] -= len(g) * (wb + limbs) + (len(p) * (a.bit_length() // 64 + wb + limbs) if a != 1 else 0)
                    if budget[0] < 0:
                        raise _WorkExhausted
                if steps % 16 == 0 and p:
                    _content_reduce(p, rem)
                break
        else:
            rem[m] = c
            del p[m]
    if rem:
        _content_reduce(rem, {})
    return rem


def _limbs(p: dict) -> int:
    return max(abs(c).bit_length() for c in p.values()) // 64 + 1


def _content_reduce(p: dict, rem: dict) -> None:
    g = mpz(0)
    for c in rem.values():
        g = gcd(g, c)
        if g == 1:
            return
    for c in p.values():
        g = gcd(g, c)
        if g == 1:
            return
    if g > 1:
        for k in p:
            p[k] //= g
        for k in rem:
            rem[k] //= g


def normal_form(f: MultiPoly, basis: Sequence[MultiPoly]) -> MultiPoly:
    """Remainder of ``f`` on division by ``basis`` (elements made monic first)."""
    prepared = [(g.LM(), g.monic()._terms) for g in basis if g]
    return MultiPoly(f.ring, _normal_form_terms(f._terms, prepared))


def s_polynomial(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    if f.is_zero() or g.is_zero():
        raise ValueError("S-polynomial of a zero polynomial")
    if f.ring != g.ring:
        raise RingMismatch(f"{f.ring} vs {g.ring}")
    L = lcm_monomial(f.LM(), g.LM())
    return f.mul_term(monomial_quotient(L, f.LM()), 1 / f.LC()) - g.mul_term(
        monomial_quotient(L, g.LM()), 1 / g.LC()
    )


# Buchberger ----------------------------------------------------------------

def _pair_key(lcm: tuple, i: int, j: int):
    # normal selection: lowest lcm degree first, ties by the lex order, then indices
    return (lcm, i, j)


def buchberger(
    ideal: Ideal | Sequence[MultiPoly], cap: int = DEFAULT_REDUCTION_CAP, work_cap: int | None = None
) -> GroebnerBasis:
    """Groebner basis by Buchberger's algorithm.

    Pairs are chosen by the normal strategy and pruned with the
    Gebauer-Moeller criteria (which include the coprime-leading-monomial
    criterion). ``cap`` bounds the number of S-polynomial reductions and
    ``work_cap`` (optional) the number of term operations spent reducing.
    Both limits are deterministic, unlike a wall-clock timeout.
    """
    if not isinstance(ideal, Ideal):
        ideal = Ideal(ideal)
    ring = ideal.ring
    gens = [g.monic() for g in ideal.generators if g]
    if not gens:
        raise ValueError("all generators are zero")
    # canonical processing order: ascending leading monomial
    gens.sort(key=lambda g: (g.LM(), sorted(g._terms.items())))

    polys: list[dict] = []
    lms: list[tuple] = []
    limbs: list[int] = []  # largest coefficient size per element, in 64-bit words
    active: list[int] = []  # indices currently in G
    pairs: dict[tuple, tuple] = {}

    def update(h: int):
        nonlocal active, pairs
        lh = lms[h]
        # Gebauer-Moeller update (Becker-Weispfenning UPDATE)
        C = [(g, lcm_monomial(lh, lms[g])) for g in active]
        D: list[tuple[int, tuple]] = []
        while C:
            g, L = C.pop(0)
            if coprime(lh, lms[g]) or (
                not any(divides(L2, L) for _, L2 in C) and not any(divides(L2, L) for _, L2 in D)
            ):
                D.append((g, L))
        E = [(g, L) for g, L in D if not coprime(lh, lms[g])]
        kept = {}
        for (i, j), L in pairs.items():
            if divides(lh, L) and lcm_monomial(lms[i], lh) != L and lcm_monomial(lms[j], lh) != L:
                continue
            kept[(i, j)] = L
        for g, L in E:
            kept[(g, h)] = L
        pairs = kept
        active = [g for g in active if not divides(lh, lms[g])]
        active.append(h)

    for g in gens:
        # unit ideal short circuit
        if g.is_constant():
            one = ring.one
            return GroebnerBasis((one,), ring, reduced=True, reductions=0)
        polys.append(_primitive(g._terms))
        lms.append(g.LM())
        limbs.append(_limbs(polys[-1]))
        update(len(polys) - 1)

    budget = [work_cap] if work_cap is not None else None
    reductions = 0
    while pairs:
        (i, j), L = min(pairs.items(), key=lambda kv: _pair_key(kv[1], *kv[0]))
        del pairs[(i, j)]
        if reductions >= cap:
            raise AlgebraCapExceeded(reductions, cap)
        reductions += 1
        li, lj = polys[i][lms[i]], polys[j][lms[j]]
        d = gcd(li, lj)
        s: dict = {}
        _sub_scaled(s, polys[i], monomial_quotient(L, lms[i]), -(lj // d))
        _sub_scaled(s, polys[j], monomial_quotient(L, lms[j]), li // d)
        basis = [(lms[g], polys[g], polys[g][lms[g]], limbs[g]) for g in active]
        try:
            r = _nf_int(s, basis, budget)
        except _WorkExhausted:
            raise AlgebraCapExceeded(reductions, work_cap, kind="work") from None
        if not r:
            continue
        lm = max(r)
        if not any(lm):
            return GroebnerBasis((ring.one,), ring, reduced=True, reductions=reductions)
        polys.append(_primitive(r))
        lms.append(lm)
        limbs.append(_limbs(polys[-1]))
        update(len(polys) - 1)

    elements = tuple(MultiPoly(ring, {m: mpq(c) for m, c in polys[g].items()}).monic() for g in sorted(active, key=lambda g: lms[g]))
    return GroebnerBasis(elements, ring, reduced=False, reductions=reductions)


def reduce_basis(G: GroebnerBasis) -> GroebnerBasis:
    """Minimal, monic, inter-reduced basis, sorted by ascending leading monomial."""
    ring = G.ring
    elems = [g.monic() for g in G.elements if g]
    if any(g.is_constant() for g in elems):
        return GroebnerBasis((ring.one,), ring, reduced=True, reductions=G.reductions)
    # minimal: drop elements whose LM is divisible by another's LM
    elems.sort(key=lambda g: g.LM())
    minimal: list[MultiPoly] = []
    for g in elems:
        if any(divides(h.LM(), g.LM()) for h in minimal):
            continue
        minimal.append(g)
    out = []
    for k, g in enumerate(minimal):
        others = [(h.LM(), h._terms) for i, h in enumerate(minimal) if i != k]
        lm = g.LM()
        tail = {m: c for m, c in g._terms.items() if m != lm}
        tail = _normal_form_terms(tail, others)
        tail[lm] = mpq(1)
        out.append(MultiPoly(ring, tail))
    out.sort(key=lambda g: g.LM())
    return GroebnerBasis(tuple(out), ring, reduced=True, reductions=G.reductions)


def groebner(
    generators: Sequence[MultiPoly], cap: int = DEFAULT_REDUCTION_CAP, work_cap: int | None = None
) -> GroebnerBasis:
    """Reduced lex Groebner basis of the ideal generated by ``generators``."""
    return reduce_basis(buchberger(Ideal(generators), cap=cap, work_cap=work_cap))


def is_groebner(G: Sequence[MultiPoly]) -> bool:
    """Check the Buchberger criterion: every S-polynomial reduces to zero."""
    G = [g for g in G if g]
    for a in range(len(G)):
        for b in range(a + 1, len(G)):
            if normal_form(s_polynomial(G[a], G[b]), G):
                return False
    return True


def check_reduced(G: GroebnerBasis) -> None:
    if not G.reduced:
        raise NotReduced("a reduced Groebner basis is required")
    for k, g in enumerate(G.elements):
        if g.LC() != 1:
            raise NotReduced(f"element {k} is not monic")
        for i, h in enumerate(G.elements):
            if i != k and any(divides(h.LM(), m) for m in g._terms):
                raise NotReduced(f"element {k} has a term reducible by element {i}")
