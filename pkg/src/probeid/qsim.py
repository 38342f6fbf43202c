"""Probe time series: coherent-vector propagation, a dense Hilbert-space
oracle, and Gaussian measurement noise."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._rng import make_rng
from .models import ModelSpec
from .pauli import PauliString, hamiltonian_matrix
from .statespace import SymbolicSystem, build


class NotSkew(ValueError):
    pass


@dataclass(frozen=True)
class NumericSystem:
    A: np.ndarray
    x0: np.ndarray
    C: np.ndarray
    dt: float
    label: str = ""

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        scale = max(np.max(np.abs(A)), 1e-300) if A.size else 1.0
        if A.size and np.max(np.abs(A + A.T)) > 1e-14 * scale:
            raise NotSkew("system matrix is not skew-symmetric")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "A", (A - A.T) / 2)
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "C", np.asarray(self.C, dtype=float))

    @classmethod
    def from_symbolic(cls, sys: SymbolicSystem, theta: dict, dt: float) -> "NumericSystem":
        return cls(sys.numeric(theta), [float(v) for v in sys.x0], [float(v) for v in sys.C], dt, str(sys.observable))

    def _spectral(self):
        # iA is Hermitian: A = -i V diag(w) V^H
        w, V = np.linalg.eigh(1j * self.A)
        return w, V

    def propagator(self) -> np.ndarray:
        """``exp(A dt)``, orthogonal up to round-off."""
        w, V = self._spectral()
        P = (V * np.exp(-1j * w * self.dt)) @ V.conj().T
        return P.real

    def state(self, j: int) -> np.ndarray:
        w, V = self._spectral()
        return ((V * np.exp(-1j * w * self.dt * j)) @ (V.conj().T @ self.x0)).real


@dataclass(frozen=True)
class TimeSeries:
    dt: float
    values: np.ndarray
    observable: str = ""
    noise: dict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or len(self.values) < 1:
            raise ValueError("a time series needs at least one point")

    def __len__(self):
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    def head(self, count: int) -> "TimeSeries":
        if count > len(self):
            raise ValueError(f"series has {len(self)} points, {count} requested")
        return TimeSeries(self.dt, self.values[:count], self.observable, self.noise, dict(self.meta))

    # CSV --------------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# dt={self.dt!r}\n")
        buf.write(f"# observable={self.observable}\n")
        noise = self.noise or {}
        buf.write(f"# sigma={noise.get('sigma', 0.0)!r}\n")
        buf.write(f"# shots={noise.get('shots', 0)}\n")
        buf.write(f"# seed={noise.get('seed', '')}\n")
        for k in sorted(self.meta):
            buf.write(f"# {k}={self.meta[k]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "t", "y"])
        for j, (t, y) in enumerate(zip(self.times, self.values)):
            w.writerow([j, repr(float(t)), repr(float(y))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TimeSeries":
        meta: dict = {}
        rows = []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
                continue
            rows.append(line)
        reader = csv.reader(rows)
        header = next(reader, None)
        if header != ["j", "t", "y"]:
            raise ValueError(f"expected header j,t,y, got {header}")
        js, ts, ys = [], [], []
        for r in reader:
            if len(r) != 3:
                raise ValueError(f"bad CSV row {r}")
            js.append(int(r[0]))
            ts.append(float(r[1]))
            ys.append(float(r[2]))
        if js != list(range(len(js))):
            raise ValueError("sample indices must run 0, 1, 2, ...")
        if "dt" in meta:
            dt = float(meta.pop("dt"))
        elif len(ts) > 1:
            dt = ts[1] - ts[0]
        else:
            raise ValueError("cannot infer dt")
        observable = meta.pop("observable", "")
        sigma = float(meta.pop("sigma", 0) or 0)
        shots = int(meta.pop("shots", 0) or 0)
        seed = meta.pop("seed", "")
        noise = None
        if sigma > 0:
            noise = {"sigma": sigma, "shots": shots, "seed": int(seed) if seed else None}
        return cls(dt, np.array(ys), observable, noise, meta)


def coherent_evolve(sys: NumericSystem, count: int) -> TimeSeries:
    """``y(j) = C exp(A dt)^j x0`` for ``j < count`` from one spectral factorization."""
    if count < 1:
        raise ValueError("count must be >= 1")
    w, V = sys._spectral()
    left = sys.C @ V
    right = V.conj().T @ sys.x0
    j = np.arange(count)
    phases = np.exp(-1j * np.outer(j * sys.dt, w))
    y = (phases @ (left * right)).real
    return TimeSeries(sys.dt, y, sys.label)


def simulate_model(
    model: ModelSpec,
    theta: dict,
    dt: float,
    count: int,
    observables: Sequence[PauliString] | None = None,
    probe_sign: int = 1,
) -> list[TimeSeries]:
    """Noiseless series for each observable (prepared in the first one's eigenstate)."""
    systems = build(model, observables, probe_sign=probe_sign)
    return [coherent_evolve(NumericSystem.from_symbolic(s, theta, dt), count) for s in systems]


def hilbert_oracle(
    model: ModelSpec,
    theta: dict,
    observable: PauliString,
    dt: float,
    count: int,
    prepare: PauliString | None = None,
    probe_sign: int = 1,
) -> TimeSeries:
    """Reference series from exact diagonalization of the full 2^N Hamiltonian."""
    N = model.N
    if N > 12:
        raise ValueError("dense oracle limited to N <= 12")
    prepare = prepare or observable
    H = hamiltonian_matrix(model.terms(), {k: float(v) for k, v in theta.items()})
    dim = 2**N
    rho0 = (np.eye(dim) + probe_sign * prepare.matrix()) / dim
    E, U = np.linalg.eigh(H)
    rho = U.conj().T @ rho0 @ U
    O = U.conj().T @ observable.matrix() @ U
    # y(t) = sum_ab rho_ab O_ba exp(-i (E_a - E_b) t)
    W = rho * O.T
    diff = E[:, None] - E[None, :]
    ys = np.empty(count)
    for j in range(count):
        ys[j] = np.sum(W * np.exp(-1j * diff * (j * dt))).real
    return TimeSeries(dt, ys, str(observable))


def add_noise(ts: TimeSeries, sigma: float = 1.0, shots: int = 1, seed: int = 0) -> TimeSeries:
    """Replace each point with a draw from Normal(y, sigma / sqrt(shots))."""
    if shots < 1 or sigma < 0:
        raise ValueError("need shots >= 1 and sigma >= 0")
    noise = {"sigma": float(sigma), "shots": int(shots), "seed": int(seed)}
    if sigma == 0:
        return TimeSeries(ts.dt, ts.values.copy(), ts.observable, noise, dict(ts.meta))
    rng = make_rng(seed)
    y = ts.values + rng.normal(0.0, sigma / math.sqrt(shots), size=len(ts))
    return TimeSeries(ts.dt, y, ts.observable, noise, dict(ts.meta))
