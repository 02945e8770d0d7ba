"""Regression models and goodness-of-fit statistics for sweep results.

RMSE follows the curve-fitting-tool convention ``sqrt(SSE / (n - p))`` with
``p`` the number of fitted parameters (``p = 0`` for a plain comparison of a
model trace against data).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateVariance, FitDiverged, ParameterError


class FitKind(enum.Enum):
    RECIPROCAL = "reciprocal"  # y = 1 / (a + b / x)
    LINEAR = "linear"  # y = a x + b
    QUADRATIC = "quadratic"  # y = c x^2 + d x + e


N_PARAMS = {FitKind.RECIPROCAL: 2, FitKind.LINEAR: 2, FitKind.QUADRATIC: 3}


@dataclass(frozen=True)
class FitResult:
    kind: FitKind
    params: tuple
    sse: float
    r_square: float
    rmse: float

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind is FitKind.RECIPROCAL:
            return 1.0 / (p[0] + p[1] / x)
        return np.polyval(p, x)


def goodness_of_fit(y, y_hat, n_params: int = 0) -> tuple[float, float, float]:
    """(SSE, R-square, RMSE) of ``y_hat`` against ``y``."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise ParameterError("y and y_hat must be 1-d arrays of equal length")
    n = len(y)
    if n < 2:
        raise ParameterError("need at least two points")
    if n <= n_params:
        raise ParameterError("more parameters than points")
    sse = float(np.sum((y - y_hat) ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0:
        raise DegenerateVariance("data have zero variance, R-square undefined")
    return sse, 1.0 - sse / sst, float(np.sqrt(sse / (n - n_params)))


def _result(kind, params, x, y) -> FitResult:
    params = tuple(float(v) for v in params)
    fit = FitResult(kind, params, 0.0, 1.0, 0.0)
    sse, r2, rmse = goodness_of_fit(y, fit.predict(x), N_PARAMS[kind])
    return FitResult(kind, params, sse, r2, rmse)


def _xy(x, y, n_min):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError("x and y must be 1-d arrays of equal length")
    if len(x) < n_min:
        raise ParameterError(f"need at least {n_min} points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ParameterError("non-finite data")
    return x, y


def fit_reciprocal(x, y) -> FitResult:
    """Fit ``y = 1 / (a + b / x)``.

    The linearisation ``1/y = a + b/x`` is solved by ordinary least squares
    and then refined on the original residuals with Levenberg-Marquardt.
    """
    x, y = _xy(x, y, 3)
    if np.any(x == 0) or np.any(y == 0):
        raise ParameterError("reciprocal model needs nonzero x and y")
    a0 = np.column_stack([np.ones_like(x), 1 / x])
    p0, *_ = np.linalg.lstsq(a0, 1 / y, rcond=None)

    def resid(p):
        return 1.0 / (p[0] + p[1] / x) - y

    scale = np.maximum(np.abs(p0), 1e-12)
    with np.errstate(all="ignore"):
        sol = least_squares(resid, p0, method="lm", x_scale=scale, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
        raise FitDiverged(f"reciprocal fit did not converge: {sol.message}")
    return _result(FitKind.RECIPROCAL, sol.x, x, y)


def fit_linear(x, y) -> FitResult:
    x, y = _xy(x, y, 3)
    return _result(FitKind.LINEAR, np.polyfit(x, y, 1), x, y)


def fit_quadratic(x, y) -> FitResult:
    x, y = _xy(x, y, 4)
    return _result(FitKind.QUADRATIC, np.polyfit(x, y, 2), x, y)


def quadratic_minimum(c: float, d: float, e: float) -> tuple[float, float]:
    """Vertex ``(-d / 2c, e - d^2 / 4c)`` of an upward parabola."""
    if not c > 0:
        raise ParameterError("parabola has no minimum (c <= 0)")
    return -d / (2 * c), e - d * d / (4 * c)
