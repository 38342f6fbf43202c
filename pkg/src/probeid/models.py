"""Catalog of nearest-neighbour chain models seen from a probe at site 1."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .pauli import CommutingObservable, HamiltonianTerm, PauliError, PauliString, accessible_set

FAMILIES = ("IsingNoField", "IsingTransverse", "ExchangeNoField", "ExchangeTransverse", "Custom")

# accepted spellings in configs and on the command line
_ALIASES = {
    "isingnofield": "IsingNoField",
    "ising": "IsingNoField",
    "isingtransverse": "IsingTransverse",
    "ising_field": "IsingTransverse",
    "exchangenofield": "ExchangeNoField",
    "exchange": "ExchangeNoField",
    "exchangetransverse": "ExchangeTransverse",
    "exchange_field": "ExchangeTransverse",
    "custom": "Custom",
}


def canonical_family(name: str) -> str:
    key = name.replace("-", "_").lower()
    if key in _ALIASES:
        return _ALIASES[key]
    if key.replace("_", "") in _ALIASES:
        return _ALIASES[key.replace("_", "")]
    raise ValueError(f"unknown model family {name!r}; expected one of {', '.join(FAMILIES)}")


@dataclass(frozen=True)
class ModelSpec:
    """A chain Hamiltonian ``H = sum_m theta_m c_m S_m``.

    ``axes`` are the (alpha, beta, gamma) Pauli axes: couplings use alpha
    (and beta for exchange), the transverse field uses gamma.
    """

    family: str
    N: int
    axes: tuple = ("X", "Y", "Z")
    custom_terms: tuple = field(default=(), compare=True)
    metadata: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        object.__setattr__(self, "axes", tuple(a.upper() for a in self.axes))
        if self.N < 2 and self.family != "Custom":
            raise ValueError(f"chain models need N >= 2, got {self.N}")
        if sorted(self.axes) != ["X", "Y", "Z"]:
            raise ValueError(f"axes must be a permutation of X, Y, Z, got {self.axes}")
        if self.family == "Custom" and not self.custom_terms:
            raise ValueError("a Custom model needs at least one term")

    @property
    def has_field(self) -> bool:
        return self.family in ("IsingTransverse", "ExchangeTransverse")

    @property
    def is_exchange(self) -> bool:
        return self.family in ("ExchangeNoField", "ExchangeTransverse")

    def parameters(self) -> list[str]:
        """Parameter names in declaration order (fields first, then couplings)."""
        if self.family == "Custom":
            out: list[str] = []
            for t in self.custom_terms:
                if t.parameter not in out:
                    out.append(t.parameter)
            return out
        names = [f"w{k}" for k in range(1, self.N + 1)] if self.has_field else []
        return names + [f"J{k}" for k in range(1, self.N)]

    def terms(self) -> list[HamiltonianTerm]:
        if self.family == "Custom":
            return list(self.custom_terms)
        a, b, g = self.axes
        half = Fraction(1, 2)
        N = self.N
        out = []
        if self.has_field:
            for k in range(1, N + 1):
                out.append(HamiltonianTerm(f"w{k}", half, PauliString.from_sites(N, {k: g})))
        for k in range(1, N):
            out.append(HamiltonianTerm(f"J{k}", half, PauliString.from_sites(N, {k: a, k + 1: a})))
            if self.is_exchange:
                out.append(HamiltonianTerm(f"J{k}", half, PauliString.from_sites(N, {k: b, k + 1: b})))
        return out

    def default_observables(self, two: bool = False) -> list[PauliString]:
        """The probe observables used by the catalog results."""
        a, b, g = self.axes
        N = self.N
        if self.family == "Custom":
            ranked = probe_observable_heuristic(self)
            return [ranked[0][0]]
        if self.family == "IsingNoField":
            return [PauliString.from_sites(N, {1: g})]
        if self.family == "ExchangeTransverse" and two:
            return [PauliString.from_sites(N, {1: a}), PauliString.from_sites(N, {1: b})]
        return [PauliString.from_sites(N, {1: a})]

    def chain_order(self) -> list[str]:
        """Parameters ordered by distance from the probe (nearest first)."""
        if self.family == "Custom":
            def dist(p):
                return min(min(t.word.support()) for t in self.custom_terms if t.parameter == p)
            return sorted(self.parameters(), key=lambda p: (dist(p), self.parameters().index(p)))
        out = []
        for k in range(1, self.N + 1):
            if self.has_field:
                out.append(f"w{k}")
            if k < self.N:
                out.append(f"J{k}")
        return out

    def describe(self) -> dict:
        d = {"family": self.family, "N": self.N, "axes": "".join(self.axes)}
        if self.family == "Custom":
            d["terms"] = [str(t) for t in self.custom_terms]
        return d


def probe_observable_heuristic(model: ModelSpec, candidates: Sequence[str] = ("X", "Y", "Z")) -> list[tuple[PauliString, int]]:
    """Single-site probe observables ranked by accessible-set size (smallest first).

    Candidates that commute with the Hamiltonian are dropped; ties keep the
    candidate order.
    """
    N = model.N
    terms = model.terms()
    ranked = []
    for pos, ax in enumerate(candidates):
        o = PauliString.from_sites(N, {1: ax})
        try:
            n = len(accessible_set(terms, [o]))
        except CommutingObservable:
            continue
        ranked.append((n, pos, o))
    if not ranked:
        raise PauliError("every candidate observable commutes with the Hamiltonian")
    ranked.sort(key=lambda r: (r[0], r[1]))
    return [(o, n) for n, _, o in ranked]


def parse_custom_terms(text: str, N: int) -> tuple[HamiltonianTerm, ...]:
    """Parse ``"1/2 J1 X1 X2; 1/2 w1 Z1"`` into Hamiltonian terms."""
    out = []
    for chunk in text.split(";"):
        toks = chunk.split()
        if not toks:
            continue
        try:
            coeff = Fraction(toks[0])
            toks = toks[1:]
        except ValueError:
            coeff = Fraction(1)
        if not toks:
            raise ValueError(f"custom term {chunk!r} has no parameter")
        param, word = toks[0], " ".join(toks[1:])
        out.append(HamiltonianTerm(param, coeff, PauliString.parse(word, N)))
    return tuple(out)
