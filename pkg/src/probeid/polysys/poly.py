"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`PolyRing` fixes the variable names and the lexicographic
precedence. Exponent tuples are stored in precedence order (most significant
variable first) so that comparing two monomials under lex is a plain tuple
comparison.
"""
from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq, mpz

Rational = type(mpq(0))


def as_rational(x) -> Rational:
    """Coerce ints, Fractions, strings like ``"3/4"`` and mpq values to mpq."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; convert explicitly with Fraction or mpq")
    return mpq(x)


def format_rational(c) -> str:
    c = as_rational(c)
    if c.denominator == 1:
        return str(int(c.numerator))
    return f"{int(c.numerator)}/{int(c.denominator)}"


class RingMismatch(ValueError):
    pass


class MonomialOrder:
    """Lexicographic order given by an explicit variable precedence."""

    kind = "lex"

    def __init__(self, precedence: Sequence[int]):
        precedence = tuple(int(i) for i in precedence)
        if sorted(precedence) != list(range(len(precedence))):
            raise ValueError(f"precedence {precedence} is not a permutation")
        self.precedence = precedence

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and self.precedence == other.precedence

    def __hash__(self):
        return hash(("lex", self.precedence))

    def __repr__(self):
        return f"MonomialOrder(lex, precedence={self.precedence})"


class PolyRing:
    """Polynomial ring Q[names] with a lex order.

    ``names`` are listed in declaration order. ``precedence`` is a permutation
    of their indices, most significant first; when omitted the declaration
    order itself is the precedence.
    """

    def __init__(self, names: Sequence[str], precedence: Sequence[int] | None = None):
        names = tuple(str(n) for n in names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if precedence is None:
            precedence = range(len(names))
        self.names = names
        self.order = MonomialOrder(precedence)
        # generators in precedence order; this is the internal exponent layout
        self.gens = tuple(names[i] for i in self.order.precedence)
        self.index = {name: i for i, name in enumerate(self.gens)}
        self.nvars = len(names)

    @classmethod
    def with_precedence(cls, names: Sequence[str], most_significant_first: Sequence[str]) -> "PolyRing":
        pos = {n: i for i, n in enumerate(names)}
        return cls(names, [pos[n] for n in most_significant_first])

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.gens == other.gens and self.names == other.names

    def __hash__(self):
        return hash((self.names, self.gens))

    def __repr__(self):
        return f"PolyRing({' > '.join(self.gens)})"

    # constructors -------------------------------------------------------
    @property
    def zero(self) -> "MultiPoly":
        return MultiPoly(self, {})

    @property
    def one(self) -> "MultiPoly":
        return self.constant(1)

    def constant(self, c) -> "MultiPoly":
        c = as_rational(c)
        return MultiPoly(self, {(0,) * self.nvars: c} if c else {})

    def gen(self, name: str) -> "MultiPoly":
        e = [0] * self.nvars
        e[self.index[name]] = 1
        return MultiPoly(self, {tuple(e): mpq(1)})

    def monomial(self, exponents: Mapping[str, int], coeff=1) -> "MultiPoly":
        e = [0] * self.nvars
        for name, k in exponents.items():
            e[self.index[name]] += int(k)
        c = as_rational(coeff)
        return MultiPoly(self, {tuple(e): c} if c else {})

    def from_dict(self, terms: Mapping[tuple, object]) -> "MultiPoly":
        """Build from ``{exponent tuple in precedence order: coefficient}``."""
        out = {}
        for m, c in terms.items():
            c = as_rational(c)
            if c:
                out[tuple(m)] = out.get(tuple(m), 0) + c
        return MultiPoly(self, {m: c for m, c in out.items() if c})

    def convert(self, f: "MultiPoly") -> "MultiPoly":
        """Re-express ``f`` (from a ring over a subset of these names) here."""
        if f.ring == self:
            return f
        perm = []
        for name in f.ring.gens:
            if name not in self.index:
                if any(m[f.ring.index[name]] for m in f._terms):
                    raise RingMismatch(f"variable {name} not in {self}")
                perm.append(None)
            else:
                perm.append(self.index[name])
        out = {}
        for m, c in f._terms.items():
            e = [0] * self.nvars
            for k, p in zip(m, perm):
                if p is not None:
                    e[p] += k
            out[tuple(e)] = c
        return MultiPoly(self, out)

    def parse(self, text: str) -> "MultiPoly":
        """Parse the canonical text form ``c * z1^a1*...*zn^an + ...``.

        Also accepts ``**`` for powers, implicit coefficient 1, and ``-``.
        """
        s = text.replace(" ", "").replace("**", "^")
        if not s or s == "0":
            return self.zero
        if s[0] not in "+-":
            s = "+" + s
        result = {}
        for sign, body in re.findall(r"([+-])([^+-]+)", s):
            coeff = mpq(1)
            e = [0] * self.nvars
            for factor in body.split("*"):
                if not factor:
                    continue
                if re.fullmatch(r"\d+(/\d+)?", factor):
                    coeff *= mpq(factor)
                    continue
                name, _, power = factor.partition("^")
                if name not in self.index:
                    raise ValueError(f"unknown variable {name!r} in {text!r}")
                e[self.index[name]] += int(power) if power else 1
            if sign == "-":
                coeff = -coeff
            key = tuple(e)
            result[key] = result.get(key, 0) + coeff
        return MultiPoly(self, {m: c for m, c in result.items() if c})


class MultiPoly:
    """Immutable sparse polynomial: map monomial -> nonzero rational."""

    __slots__ = ("ring", "_terms", "_lm")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self._terms = terms
        self._lm = None

    # structure ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def terms(self) -> list[tuple[tuple, Rational]]:
        """Terms in decreasing monomial order."""
        return sorted(self._terms.items(), reverse=True)

    def as_dict(self) -> dict:
        return dict(self._terms)

    def coeff(self, monomial: tuple) -> Rational:
        return self._terms.get(tuple(monomial), mpq(0))

    def LM(self) -> tuple:
        if not self._terms:
            raise ValueError("zero polynomial has no leading monomial")
        if self._lm is None:
            self._lm = max(self._terms)
        return self._lm

    def LC(self) -> Rational:
        return self._terms[self.LM()]

    def LT(self) -> "MultiPoly":
        m = self.LM()
        return MultiPoly(self.ring, {m: self._terms[m]})

    def total_degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    def degree(self, name: str) -> int:
        i = self.ring.index[name]
        return max((m[i] for m in self._terms), default=-1)

    def variables(self) -> tuple[str, ...]:
        """Variables that actually occur, in precedence order."""
        used = [any(m[i] for m in self._terms) for i in range(self.ring.nvars)]
        return tuple(n for n, u in zip(self.ring.gens, used) if u)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    def monic(self) -> "MultiPoly":
        if not self._terms:
            return self
        inv = mpq(1) / self.LC()
        return MultiPoly(self.ring, {m: c * inv for m, c in self._terms.items()})

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "MultiPoly"):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return self.ring.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return MultiPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.ring, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = as_rational(other)
            if not c:
                return self.ring.zero
            return MultiPoly(self.ring, {m: v * c for m, v in self._terms.items()})
        self._check(other)
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return MultiPoly(self.ring, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result, base = self.ring.one, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def mul_term(self, monomial: tuple, coeff) -> "MultiPoly":
        c = as_rational(coeff)
        if not c:
            return self.ring.zero
        return MultiPoly(
            self.ring,
            {tuple(a + b for a, b in zip(m, monomial)): v * c for m, v in self._terms.items()},
        )

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.ring == other.ring and self._terms == other._terms
        try:
            return self == self.ring.constant(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self._terms.items())))

    # evaluation -------------------------------------------------------------
    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a full assignment ``{name: value}``.

        Rational inputs give an exact rational; floats or complex give floats.
        """
        vals = [values[n] for n in self.ring.gens]
        total = 0
        for m, c in self._terms.items():
            t = c if all(isinstance(v, (int, Rational)) or hasattr(v, "denominator") for v in vals) else float(c)
            for v, k in zip(vals, m):
                if k:
                    t = t * v**k
            total = total + t
        return total

    def subs(self, values: Mapping[str, object]) -> "MultiPoly":
        """Substitute rationals for some variables (the ring is kept)."""
        idx = {self.ring.index[n]: as_rational(v) for n, v in values.items()}
        out: dict = {}
        for m, c in self._terms.items():
            e = list(m)
            for i, v in idx.items():
                if e[i]:
                    c = c * v ** e[i]
                    e[i] = 0
            if c:
                key = tuple(e)
                out[key] = out.get(key, 0) + c
        return MultiPoly(self.ring, {m: c for m, c in out.items() if c})

    # printing ---------------------------------------------------------------
    def to_str(self) -> str:
        """Canonical text: ``c * z1^a1*...*zn^an + ...`` (terms in decreasing order)."""
        if not self._terms:
            return "0"
        ring = self.ring
        pieces = []
        for m, c in self.terms():
            factors = []
            for name in ring.names:
                k = m[ring.index[name]]
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mag = format_rational(abs(c))
            if not factors:
                body = mag
            elif mag == "1":
                body = "*".join(factors)
            else:
                body = f"{mag} * " + "*".join(factors)
            pieces.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(pieces)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    __str__ = to_str

    def __repr__(self):
        return f"MultiPoly({self.to_str()!r})"


def lcm_monomial(a: tuple, b: tuple) -> tuple:
    return tuple(x if x >= y else y for x, y in zip(a, b))


def divides(a: tuple, b: tuple) -> bool:
    """True when monomial ``a`` divides monomial ``b``."""
    return all(x <= y for x, y in zip(a, b))


def monomial_quotient(b: tuple, a: tuple) -> tuple:
    return tuple(y - x for x, y in zip(a, b))


def coprime(a: tuple, b: tuple) -> bool:
    return all(not x or not y for x, y in zip(a, b))


def common_ring(polys: Iterable[MultiPoly]) -> PolyRing:
    polys = list(polys)
    if not polys:
        raise ValueError("empty polynomial list")
    ring = polys[0].ring
    for p in polys[1:]:
        if p.ring != ring:
            raise RingMismatch(f"{p.ring} vs {ring}")
    return ring


def integer_content(values: Iterable) -> mpz:
    from gmpy2 import gcd

    g = mpz(0)
    for v in values:
        g = gcd(g, v)
        if g == 1:
            break
    return g
