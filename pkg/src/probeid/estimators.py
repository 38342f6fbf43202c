"""scikit-learn style wrappers around the realization and estimation steps.

Hyperparameters are set in ``__init__`` and never altered there; fitted
state lives in attributes with a trailing underscore.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .era import SPURIOUS_THRESHOLD, realize_series, transfer_est
from .estimation import estimate_parameters
from .models import ModelSpec
from .polysys import DEFAULT_REDUCTION_CAP
from .qsim import TimeSeries, simulate_model
from .statespace import build, poly_system_for


def _as_series(X, dt: float | None) -> TimeSeries:
    if isinstance(X, TimeSeries):
        return X
    if dt is None:
        raise ValueError("dt is required when fitting a bare array")
    y = np.asarray(X, dtype=float).ravel()
    return TimeSeries(float(dt), y)


class ERARealizer(BaseEstimator):
    """Minimal realization ``(A, C, x0)`` of one output series.

    ``fit`` accepts a ``TimeSeries`` or a 1-d array of samples (then ``dt``
    is required). ``predict`` returns the realized output at sample indices.
    """

    def __init__(self, n: int = 2, hankel_size: int | None = None, threshold: float = SPURIOUS_THRESHOLD, dt: float | None = None):
        self.n = n
        self.hankel_size = hankel_size
        self.threshold = threshold
        self.dt = dt

    def fit(self, X, y=None):
        ts = _as_series(X, self.dt)
        real = realize_series(ts, self.n, self.hankel_size)
        self.realization_ = real
        self.A_ = real.A
        self.C_ = real.C
        self.x0_ = real.x0
        self.singular_values_ = real.singular_values
        self.branch_margin_ = real.branch_margin
        self.transfer_ = transfer_est(real, self.threshold)
        self.dt_ = ts.dt
        return self

    def predict(self, X) -> np.ndarray:
        """``y(j) = C exp(A dt)^j x0`` for each integer index in ``X``."""
        check_is_fitted(self, "A_")
        idx = np.asarray(X, dtype=int).ravel()
        w, V = np.linalg.eig(self.A_ * self.dt_)
        left = self.C_ @ V
        right = np.linalg.solve(V, self.x0_)
        return (np.exp(np.outer(idx, w)) @ (left * right)).real

    def score(self, X, y) -> float:
        """Negative RMS deviation between ``predict(X)`` and ``y``."""
        return -float(np.sqrt(np.mean((self.predict(X) - np.asarray(y, dtype=float)) ** 2)))


class HamiltonianEstimator(BaseEstimator):
    """Parameter magnitudes of a chain model from probe series.

    ``fit`` takes one ``TimeSeries`` per observable (a single series is
    accepted as is). ``predict`` simulates the fitted model on the sample
    indices in ``X``, with the signs the data could not fix taken positive.
    """

    def __init__(
        self,
        model: ModelSpec | None = None,
        observables: Sequence | None = None,
        n: int | None = None,
        hankel_size: int | None = None,
        threshold: float = SPURIOUS_THRESHOLD,
        solver: str = "auto",
        cap: int = DEFAULT_REDUCTION_CAP,
        strict: bool = True,
    ):
        self.model = model
        self.observables = observables
        self.n = n
        self.hankel_size = hankel_size
        self.threshold = threshold
        self.solver = solver
        self.cap = cap
        self.strict = strict

    def fit(self, X, y=None, truth: dict | None = None):
        if self.model is None:
            raise ValueError("HamiltonianEstimator needs a model")
        series = [X] if isinstance(X, TimeSeries) else list(X)
        observables = self.observables
        if observables is None:
            observables = self.model.default_observables(two=len(series) == 2 and self.model.family == "ExchangeTransverse")
        observables = list(observables)
        system = poly_system_for(self.model, observables)
        report = estimate_parameters(
            self.model, series, observables, n=self.n, hankel_size=self.hankel_size, truth=truth,
            threshold=self.threshold, solver=self.solver, cap=self.cap, system=system, strict=self.strict,
        )
        self.report_ = report
        self.magnitudes_ = dict(report.magnitudes)
        self.signed_ = dict(report.signed)
        self.observables_ = observables
        self.n_ = len(system.source.denominator) - 1 if system.source is not None else build(self.model, observables)[0].n
        self.dt_ = series[0].dt
        return self

    @property
    def theta_(self) -> dict:
        check_is_fitted(self, "magnitudes_")
        return {p: self.signed_.get(p, m) for p, m in self.magnitudes_.items()}

    def _full_theta(self) -> dict:
        # parameters invisible from the probe do not change its series; any value will do
        return {p: self.theta_.get(p, 0.0) for p in self.model.parameters()}

    def predict(self, X) -> np.ndarray:
        """Noiseless series, one row per observable, at sample indices ``X``."""
        check_is_fitted(self, "magnitudes_")
        idx = np.asarray(X, dtype=int).ravel()
        count = int(idx.max()) + 1 if idx.size else 0
        rows = simulate_model(self.model, self._full_theta(), self.dt_, max(count, 1), self.observables_)
        return np.vstack([ts.values[idx] for ts in rows])
