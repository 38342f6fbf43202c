"""Eigensystem realization: Hankel matrices, balanced SVD realization, the
continuous-time generator and the estimated transfer function."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qsim import TimeSeries

RANK_FLOOR = 1e-13
BRANCH_MARGIN = 1e-6
SPURIOUS_THRESHOLD = 1e-6


class RankDeficient(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class PrincipalBranchViolation(ValueError):
    """An eigenvalue of the discrete propagator sits on the branch cut of the log."""


@dataclass(frozen=True)
class HankelPair:
    H0: np.ndarray
    H1: np.ndarray
    dt: float

    @property
    def r(self) -> int:
        return self.H0.shape[0]

    @property
    def s(self) -> int:
        return self.H0.shape[1]


def build_hankel(ts: TimeSeries, r: int, s: int | None = None) -> HankelPair:
    """``H0[i, j] = y(i + j)``, ``H1[i, j] = y(i + j + 1)``; uses ``r + s`` samples."""
    s = r if s is None else s
    if r < 1 or s < 1:
        raise ValueError("Hankel dimensions must be positive")
    if len(ts) < r + s:
        raise InsufficientData(f"need {r + s} samples for a {r}x{s} Hankel pair, have {len(ts)}")
    y = ts.values
    idx = np.add.outer(np.arange(r), np.arange(s))
    return HankelPair(y[idx], y[idx + 1], ts.dt)


def low_rank_truncate(H: np.ndarray, n: int):
    """Best rank-``n`` factors ``(U1, sigma1, V1)`` with ``H ~ U1 diag(sigma1) V1^T``."""
    if min(H.shape) < n:
        raise RankDeficient(f"a {H.shape[0]}x{H.shape[1]} matrix cannot have rank {n}")
    U, sig, Vt = np.linalg.svd(H)
    if sig[0] == 0 or sig[n - 1] < RANK_FLOOR * sig[0]:
        raise RankDeficient(f"singular value {n} is below {RANK_FLOOR} of the largest")
    return U[:, :n], sig[:n], Vt[:n, :].T


@dataclass(frozen=True)
class RealizationEst:
    A: np.ndarray  # continuous-time generator
    C: np.ndarray
    x0: np.ndarray
    singular_values: np.ndarray  # all singular values of H0
    dt: float
    A_discrete: np.ndarray = field(repr=False, default=None)
    branch_margin: float = 0.0  # pi minus the largest |arg| of the discrete eigenvalues

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _principal_log(Ad: np.ndarray):
    w, V = np.linalg.eig(Ad)
    args = np.abs(np.angle(w))
    margin = float(np.pi - np.max(args)) if len(w) else np.pi
    if np.any(args >= np.pi - BRANCH_MARGIN):
        raise PrincipalBranchViolation(
            f"discrete eigenvalue argument {np.max(args):.6f} reaches pi: sampling step too large"
        )
    if np.any(np.abs(w) == 0):
        raise RankDeficient("singular discrete propagator")
    L = V @ np.diag(np.log(w)) @ np.linalg.inv(V)
    return L.real, margin


def era_realize(pair: HankelPair, n: int) -> RealizationEst:
    U1, sig, V1 = low_rank_truncate(pair.H0, n)
    root = np.sqrt(sig)
    Ad = (U1.T @ pair.H1 @ V1) / np.outer(root, root)
    L, margin = _principal_log(Ad)
    C = U1[0, :] * root
    x0 = root * V1[0, :]
    all_sig = np.linalg.svd(pair.H0, compute_uv=False)
    return RealizationEst(L / pair.dt, C, x0, all_sig, pair.dt, Ad, margin)


@dataclass(frozen=True)
class TransferEstimate:
    """Monic-denominator rational function; coefficient vectors ascending in s."""

    numerator: np.ndarray
    denominator: np.ndarray

    def __add__(self, other: "TransferEstimate") -> "TransferEstimate":
        n = max(len(self.numerator), len(other.numerator))
        num = np.zeros(n)
        num[: len(self.numerator)] += self.numerator
        num[: len(other.numerator)] += other.numerator
        if len(self.denominator) != len(other.denominator):
            raise ValueError("denominators of different order")
        return TransferEstimate(num, (self.denominator + other.denominator) / 2)

    def __call__(self, s):
        return np.polyval(self.numerator[::-1], s) / np.polyval(self.denominator[::-1], s)


def _clean(coeffs: np.ndarray, degree: int, rho: float, threshold: float) -> np.ndarray:
    # compare coefficients after rescaling s -> rho s so magnitudes are comparable
    k = np.arange(len(coeffs))
    scaled = np.abs(coeffs) * rho ** (k - degree).astype(float)
    out = coeffs.copy()
    if scaled.size and np.max(scaled) > 0:
        out[scaled < threshold * np.max(scaled)] = 0.0
    return out


def transfer_est(real: RealizationEst, threshold: float = SPURIOUS_THRESHOLD) -> TransferEstimate:
    """``C (sI - A)^-1 x0`` as coefficient vectors.

    Spurious coefficients are zeroed when below ``threshold`` times the largest
    one, after rescaling ``s`` by the spectral radius so that coefficients of
    different powers are comparable.
    """
    A, C, x = real.A, real.C, real.x0
    n = A.shape[0]
    den_desc = np.real(np.poly(A)) if n else np.array([1.0])
    den = den_desc[::-1].copy()  # ascending, den[n] = 1
    markov = []
    v = x.copy()
    for _ in range(n):
        markov.append(float(C @ v))
        v = A @ v
    num = np.zeros(n)
    for k in range(1, n + 1):
        # coefficient of s^(n-k): sum_j den[n-k+1+j] * C A^j x
        num[n - k] = sum(den[n - k + 1 + j] * markov[j] for j in range(k))
    rho = float(np.max(np.abs(np.linalg.eigvals(A)))) if n else 1.0
    rho = rho if rho > 0 else 1.0
    if threshold > 0:
        num = _clean(num, n - 1, rho, threshold)
        den[:-1] = _clean(den[:-1], n, rho, threshold)
    return TransferEstimate(num, den)


def realize_series(ts: TimeSeries, n: int, size: int | None = None) -> RealizationEst:
    """ERA on one series with square Hankel blocks of ``size`` (default: as large as possible)."""
    size = size if size is not None else len(ts) // 2
    if size < n:
        raise RankDeficient(f"Hankel size {size} is below the model order {n}")
    return era_realize(build_hankel(ts, size, size), n)


def relative_error_percent(truth: float, estimate: float) -> float:
    """``|(|estimate| - |truth|) / truth| * 100``."""
    return abs((abs(estimate) - abs(truth)) / truth) * 100.0
