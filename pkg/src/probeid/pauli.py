"""Exact algebra of N-site Pauli strings.

Words are strings over ``IXYZ`` with site 1 first. Products carry an integer
power of ``i``; traces are never formed as matrices, only through Pauli
orthogonality, so set generation scales to long chains.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# single-site products: (a, b) -> (phase exponent of i, result)
_TABLE = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("Y", "I"): (0, "Y"), ("Z", "I"): (0, "Z"),
    ("X", "X"): (0, "I"), ("Y", "Y"): (0, "I"), ("Z", "Z"): (0, "I"),
    ("X", "Y"): (1, "Z"), ("Y", "Z"): (1, "X"), ("Z", "X"): (1, "Y"),
    ("Y", "X"): (3, "Z"), ("Z", "Y"): (3, "X"), ("X", "Z"): (3, "Y"),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliError(ValueError):
    pass


class CommutingObservable(PauliError):
    """A requested observable commutes with the Hamiltonian."""

    def __init__(self, word: "PauliString"):
        super().__init__(f"observable {word} commutes with the Hamiltonian")
        self.word = word


@dataclass(frozen=True, order=True)
class PauliString:
    word: str

    def __post_init__(self):
        if not self.word or set(self.word) - set("IXYZ"):
            raise PauliError(f"invalid Pauli word {self.word!r}")

    @classmethod
    def from_sites(cls, N: int, sites: dict[int, str]) -> "PauliString":
        """``sites`` maps 1-based site index to ``X``/``Y``/``Z``."""
        w = ["I"] * N
        for k, p in sites.items():
            if not 1 <= k <= N:
                raise PauliError(f"site {k} outside 1..{N}")
            w[k - 1] = p
        return cls("".join(w))

    @classmethod
    def parse(cls, text: str, N: int) -> "PauliString":
        """Parse ``"X1 X2"`` / ``"Z1"`` style text on ``N`` sites."""
        sites: dict[int, str] = {}
        for tok in text.replace("*", " ").split():
            m = re.fullmatch(r"([XYZ])(\d+)", tok)
            if not m:
                raise PauliError(f"bad Pauli token {tok!r}")
            k = int(m.group(2))
            if k in sites:
                raise PauliError(f"site {k} repeated in {text!r}")
            sites[k] = m.group(1)
        if not sites:
            raise PauliError(f"empty Pauli string {text!r}")
        return cls.from_sites(N, sites)

    @property
    def N(self) -> int:
        return len(self.word)

    def is_identity(self) -> bool:
        return set(self.word) == {"I"}

    def support(self) -> list[int]:
        return [k + 1 for k, p in enumerate(self.word) if p != "I"]

    def permuted(self, perm: Sequence[int]) -> "PauliString":
        """Site ``k`` of the result is site ``perm[k]`` of this word (0-based)."""
        return PauliString("".join(self.word[p] for p in perm))

    def matrix(self) -> np.ndarray:
        m = np.array([[1.0 + 0j]])
        for p in self.word:
            m = np.kron(m, _MATRICES[p])
        return m

    def __str__(self):
        toks = [f"{p}{k + 1}" for k, p in enumerate(self.word) if p != "I"]
        return " ".join(toks) if toks else "I"


@dataclass(frozen=True)
class SignedPauli:
    """The operator ``i**phase * word``."""

    phase: int
    word: PauliString

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 4)

    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    def __mul__(self, other: "SignedPauli") -> "SignedPauli":
        return multiply(self, other)

    def __str__(self):
        return ["", "i*", "-", "-i*"][self.phase] + str(self.word)


def _check_len(a: PauliString, b: PauliString):
    if a.N != b.N:
        raise PauliError(f"length mismatch: {a.N} vs {b.N}")


def word_product(a: PauliString, b: PauliString) -> tuple[int, PauliString]:
    _check_len(a, b)
    phase = 0
    out = []
    for x, y in zip(a.word, b.word):
        p, r = _TABLE[(x, y)]
        phase += p
        out.append(r)
    return phase % 4, PauliString("".join(out))


def multiply(a: SignedPauli, b: SignedPauli) -> SignedPauli:
    p, w = word_product(a.word, b.word)
    return SignedPauli(a.phase + b.phase + p, w)


def anticommuting_sites(a: PauliString, b: PauliString) -> int:
    _check_len(a, b)
    return sum(1 for x, y in zip(a.word, b.word) if x != "I" and y != "I" and x != y)


def commutator(a: PauliString, b: PauliString) -> tuple[int, PauliString] | None:
    """``i[a, b]`` as ``(sign * 2, word)``, or ``None`` when a and b commute."""
    if anticommuting_sites(a, b) % 2 == 0:
        return None
    p, w = word_product(a, b)
    # i[a,b] = 2i ab = 2 i^(p+1) w, and p is odd here
    return (2 if (p + 1) % 4 == 0 else -2), w


@dataclass(frozen=True)
class HamiltonianTerm:
    """``coefficient * theta[parameter] * word``."""

    parameter: str
    coefficient: Fraction
    word: PauliString

    def __post_init__(self):
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        if self.coefficient == 0:
            raise PauliError("zero coefficient in Hamiltonian term")
        if self.word.is_identity():
            raise PauliError("identity term in Hamiltonian")

    def __str__(self):
        return f"{self.coefficient} * {self.parameter} * {self.word}"


@dataclass(frozen=True)
class AccessibleSet:
    members: tuple
    provenance: tuple  # generation index of each member

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def index(self, word: PauliString) -> int:
        return self.members.index(word)

    def to_strings(self) -> list[str]:
        return [str(m) for m in self.members]


def commutes_with(word: PauliString, terms: Iterable[HamiltonianTerm]) -> bool:
    return all(commutator(t.word, word) is None for t in terms)


def accessible_set(terms: Sequence[HamiltonianTerm], observables: Sequence[PauliString]) -> AccessibleSet:
    """Closure of the observables under commutators with the Hamiltonian terms.

    Members appear breadth first: generation by generation, and within a
    generation in the order their parents and the terms were listed.
    """
    terms = list(terms)
    members: list[PauliString] = []
    gen: list[int] = []
    seen = set()
    for o in observables:
        if o.is_identity():
            raise PauliError("the identity cannot be an observable")
        if commutes_with(o, terms):
            raise CommutingObservable(o)
        if o not in seen:
            seen.add(o)
            members.append(o)
            gen.append(0)
    k = 0
    while k < len(members):
        o = members[k]
        for t in terms:
            c = commutator(t.word, o)
            if c is not None and c[1] not in seen:
                seen.add(c[1])
                members.append(c[1])
                gen.append(gen[k] + 1)
        k += 1
    return AccessibleSet(tuple(members), tuple(gen))


def structure_constants(terms: Sequence[HamiltonianTerm], G: AccessibleSet) -> dict[tuple[int, int, int], Fraction]:
    """Sparse ``V[m, k, l] = c_m NTr(i[S_m, O_k] O_l)`` over term index ``m``.

    With these constants ``dx_k/dt = sum_l (sum_m theta_m V_mkl) x_l``.
    """
    index = {w: i for i, w in enumerate(G.members)}
    V: dict[tuple[int, int, int], Fraction] = {}
    for m, t in enumerate(terms):
        for k, o in enumerate(G.members):
            c = commutator(t.word, o)
            if c is None:
                continue
            sign, w = c
            if w not in index:
                raise PauliError(f"set is not closed: {w} missing")
            key = (m, k, index[w])
            V[key] = V.get(key, Fraction(0)) + t.coefficient * sign
    return {k: v for k, v in V.items() if v}


def hamiltonian_matrix(terms: Sequence[HamiltonianTerm], theta: dict[str, float]) -> np.ndarray:
    N = terms[0].word.N
    H = np.zeros((2**N, 2**N), dtype=complex)
    for t in terms:
        H += float(t.coefficient) * theta[t.parameter] * t.word.matrix()
    return H
