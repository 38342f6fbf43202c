"""Elimination, radicals, shape classification and real solutions of
zero-dimensional systems."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .groebner import (
    DEFAULT_REDUCTION_CAP,
    GroebnerBasis,
    Ideal,
    _normal_form_terms,
    check_reduced,
    groebner,
)
from .poly import MultiPoly, PolyRing
from .univariate import (
    DEFAULT_ISOLATION_WIDTH,
    RootInterval,
    UniPoly,
    isolate_real_roots,
    rational_in_interval,
    sign_at_root,
    squarefree_part,
)


class PositiveDimensional(ValueError):
    """The ideal has infinitely many complex solutions."""


class NotShapeLemma(ValueError):
    pass


def _ideal(I) -> Ideal:
    return I if isinstance(I, Ideal) else Ideal(list(I))


# zero-dimensionality --------------------------------------------------------

def is_zero_dimensional(G: GroebnerBasis) -> bool:
    """Every variable has a pure power among the leading monomials."""
    if G.is_unit():
        return True
    lms = G.leading_monomials()
    for i in range(G.ring.nvars):
        if not any(m[i] and sum(m) == m[i] for m in lms):
            return False
    return True


def standard_monomials(G: GroebnerBasis) -> list[tuple]:
    """Monomials not divisible by any leading monomial (finite when zero-dimensional)."""
    if not is_zero_dimensional(G):
        raise PositiveDimensional("infinitely many standard monomials")
    if G.is_unit():
        return []
    lms = G.leading_monomials()
    n = G.ring.nvars
    bounds = []
    for i in range(n):
        bounds.append(min(m[i] for m in lms if m[i] and sum(m) == m[i]))
    out = []

    def rec(prefix: list):
        if len(prefix) == n:
            m = tuple(prefix)
            if not any(all(a <= b for a, b in zip(lm, m)) for lm in lms):
                out.append(m)
            return
        for k in range(bounds[len(prefix)]):
            rec(prefix + [k])

    rec([])
    return sorted(out)


def minimal_polynomial(G: GroebnerBasis, var: str) -> UniPoly:
    """Monic generator of I ∩ Q[var] from any Groebner basis of a zero-dimensional I.

    Normal forms of var^0, var^1, ... are reduced against the basis until the
    first linear dependence; its coefficients give the generator.
    """
    if G.is_unit():
        return UniPoly(var, [1])
    if not is_zero_dimensional(G):
        raise PositiveDimensional(f"no elimination generator in {var}")
    ring = G.ring
    basis = [(g.LM(), g.monic()._terms) for g in G.elements]
    i = ring.index[var]
    # incremental echelon form over Q: rows = (pivot monomial, vector dict, combination)
    rows: list[tuple[tuple, dict, dict]] = []
    e = [0] * ring.nvars
    power: dict = {tuple(e): mpq(1)}
    k = 0
    while True:
        nf = _normal_form_terms(power, basis)
        vec = dict(nf)
        comb = {k: mpq(1)}
        for piv, rvec, rcomb in rows:
            c = vec.get(piv)
            if c:
                for m, v in rvec.items():
                    w = vec.get(m, 0) - c * v
                    if w:
                        vec[m] = w
                    else:
                        vec.pop(m, None)
                for j, v in rcomb.items():
                    comb[j] = comb.get(j, 0) - c * v
        if not vec:
            coeffs = [comb.get(j, 0) for j in range(k + 1)]
            return UniPoly(var, coeffs).monic()
        piv = max(vec)
        inv = mpq(1) / vec[piv]
        rows.append((piv, {m: v * inv for m, v in vec.items()}, {j: v * inv for j, v in comb.items()}))
        # next power: multiply the normal form by var and reduce again
        k += 1
        power = {}
        for m, c in nf.items():
            mm = list(m)
            mm[i] += 1
            power[tuple(mm)] = c


def eliminate_to(ring: PolyRing, keep: str) -> PolyRing:
    """Same variables with ``keep`` moved to the least significant position."""
    prec = [n for n in ring.gens if n != keep] + [keep]
    return PolyRing.with_precedence(ring.names, prec)


def elimination_generator(I, keep: str, cap: int = DEFAULT_REDUCTION_CAP) -> UniPoly | None:
    """Monic generator of I ∩ Q[keep], or ``None`` when that intersection is zero.

    A lex basis with ``keep`` least significant is computed; by the elimination
    theorem its elements lying in Q[keep] generate the intersection.
    """
    I = _ideal(I)
    R = eliminate_to(I.ring, keep)
    G = groebner([R.convert(f) for f in I.generators], cap=cap)
    idx = R.index[keep]
    for g in G.elements:
        if all(not any(k for j, k in enumerate(m) if j != idx) for m in g._terms):
            return UniPoly.from_multi(g, keep).monic()
    return None


def elimination_generators(G: GroebnerBasis) -> dict[str, UniPoly]:
    """All univariate elimination generators of a zero-dimensional ideal."""
    return {v: minimal_polynomial(G, v) for v in G.ring.names}


def radical_zero_dim(I, G: GroebnerBasis | None = None, cap: int = DEFAULT_REDUCTION_CAP) -> Ideal:
    """Generators of √I: I plus the squarefree parts of its elimination generators."""
    I = _ideal(I)
    ring = I.ring
    phis = []
    for v in ring.names:
        if G is not None:
            if not is_zero_dimensional(G):
                raise PositiveDimensional(f"no elimination generator in {v}")
            h = minimal_polynomial(G, v)
        else:
            h = elimination_generator(I, v, cap=cap)
            if h is None:
                raise PositiveDimensional(f"no elimination generator in {v}")
        phis.append(squarefree_part(h).to_multi(ring))
    return Ideal(list(I.generators) + phis)


def radical_basis(
    I, G: GroebnerBasis | None = None, cap: int = DEFAULT_REDUCTION_CAP, work_cap: int | None = None
) -> GroebnerBasis:
    """Reduced lex basis of √I, reusing ``G`` (a basis of I) when given."""
    I = _ideal(I)
    if G is None:
        G = groebner(I.generators, cap=cap, work_cap=work_cap)
    if G.is_unit():
        return G
    if not is_zero_dimensional(G):
        raise PositiveDimensional("ideal is not zero-dimensional")
    extra = []
    for v in G.ring.names:
        h = minimal_polynomial(G, v)
        phi = squarefree_part(h)
        if phi.degree < h.degree:
            extra.append(phi.to_multi(G.ring))
    if not extra:
        return G
    return groebner(list(G.elements) + extra, cap=cap, work_cap=work_cap)


# shapes --------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeClass:
    kind: str  # NoSolution | Maximal | ShapeLemma | Triangular | Other
    pivot: str | None = None
    alpha: int = 0
    univariate: UniPoly | None = None
    # var -> e_j with var = e_j(pivot) on the variety
    expressions: dict = field(default_factory=dict)

    def __str__(self):
        if self.kind == "ShapeLemma":
            return f"ShapeLemma(alpha={self.alpha})"
        return self.kind


def classify_shape(G: GroebnerBasis, vars: Sequence[str] | None = None) -> ShapeClass:
    """Classify a reduced lex basis; the pivot is the least significant variable."""
    check_reduced(G)
    ring = G.ring
    if G.is_unit():
        return ShapeClass("NoSolution")
    gens = list(vars) if vars is not None else list(ring.gens)
    pivot = gens[-1]
    pi = ring.index[pivot]
    if len(G) == len(gens):
        univ = None
        exprs = {}
        ok = True
        for g in G.elements:
            lm = g.LM()
            if sum(lm) == lm[pi] and lm[pi] > 0:
                if univ is not None:
                    ok = False
                    break
                try:
                    univ = UniPoly.from_multi(g, pivot)
                except ValueError:
                    ok = False
                    break
                continue
            # z_j + q_j(pivot)
            j = [k for k, e in enumerate(lm) if e]
            if len(j) != 1 or lm[j[0]] != 1:
                ok = False
                break
            var = ring.gens[j[0]]
            rest = MultiPoly(ring, {m: c for m, c in g._terms.items() if m != lm})
            try:
                q = UniPoly.from_multi(rest, pivot)
            except ValueError:
                ok = False
                break
            exprs[var] = -q
        if ok and univ is not None and len(exprs) == len(gens) - 1:
            alpha = univ.degree
            exprs[pivot] = UniPoly(pivot, [0, 1])
            if alpha == 1:
                return ShapeClass("Maximal", pivot, 1, univ, exprs)
            return ShapeClass("ShapeLemma", pivot, alpha, univ, exprs)
    if is_zero_dimensional(G):
        return ShapeClass("Triangular", pivot)
    return ShapeClass("Other", pivot)


# real solutions -----------------------------------------------------------

@dataclass(frozen=True)
class RealSolution:
    """One real point of a shape-lemma variety, certified by an isolating interval."""

    pivot: str
    root: RootInterval
    univariate: UniPoly
    expressions: dict  # var -> UniPoly in the pivot

    def value(self, var: str) -> float:
        e = self.expressions[var]
        if self.root.exact:
            return float(e(self.root.lo))
        return float(e(float(self.root.mid)))

    def exact_value(self, var: str):
        """Rational coordinate when the pivot root is rational, else ``None``."""
        if not self.root.exact:
            return None
        return self.expressions[var](self.root.lo)

    def sign(self, var: str) -> int:
        return sign_at_root(self.expressions[var], self.univariate, self.root)

    def values(self) -> dict[str, float]:
        return {v: self.value(v) for v in self.expressions}

    def contains_point(self, point: dict) -> bool:
        """Exact test that a rational point is this solution."""
        t = point[self.pivot]
        if not (self.root.lo <= t <= self.root.hi) or self.univariate(t) != 0:
            return False
        return all(e(t) == point[v] for v, e in self.expressions.items())


def enumerate_real_solutions(G: GroebnerBasis | ShapeClass, width=DEFAULT_ISOLATION_WIDTH) -> list[RealSolution]:
    """Real points of a Maximal or ShapeLemma basis."""
    shape = G if isinstance(G, ShapeClass) else classify_shape(G)
    if shape.kind not in ("Maximal", "ShapeLemma"):
        raise NotShapeLemma(f"basis has shape {shape.kind}")
    p = squarefree_part(shape.univariate)
    out = []
    for iv in isolate_real_roots(p, width):
        if not iv.exact:
            # a rational root inside the interval is recovered exactly
            r = rational_in_interval(iv.lo, iv.hi)
            if p(r) == 0:
                iv = RootInterval(r, r)
        out.append(RealSolution(shape.pivot, iv, p, dict(shape.expressions)))
    return out


def shape_with_separating_form(
    generators: Sequence[MultiPoly],
    cap: int = DEFAULT_REDUCTION_CAP,
    attempts: int = 8,
    work_cap: int | None = None,
) -> tuple[ShapeClass, dict]:
    """Bring a zero-dimensional system's radical into shape position.

    The existing least significant variable is tried first; failing that a new
    variable ``_u = Σ c_j z_j`` with small integer weights is adjoined as pivot.
    Returns the shape and the weights (empty when no new variable was needed).
    """
    ring = generators[0].ring
    G = radical_basis(generators, cap=cap, work_cap=work_cap)
    shape = classify_shape(G)
    if shape.kind in ("NoSolution", "Maximal", "ShapeLemma"):
        return shape, {}
    if shape.kind == "Other":
        raise PositiveDimensional("ideal is not zero-dimensional")
    names = list(ring.names) + ["_u"]
    R = PolyRing.with_precedence(names, list(ring.gens) + ["_u"])
    for a in range(attempts):
        weights = [(k * (a + 2)) % (len(names) + 2 * a + 1) + 1 for k in range(ring.nvars)]
        form = R.gen("_u")
        for w, v in zip(weights, ring.gens):
            form = form - R.gen(v) * w
        Gu = groebner([R.convert(g) for g in G.elements] + [form], cap=cap, work_cap=work_cap)
        Gu = radical_basis(Gu.elements, G=Gu, cap=cap, work_cap=work_cap)
        shape = classify_shape(Gu)
        if shape.kind in ("Maximal", "ShapeLemma"):
            return shape, dict(zip(ring.gens, weights))
    raise NotShapeLemma("no separating linear form found")
