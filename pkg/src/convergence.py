# src/convergence.py

from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence
import logging

import numpy as np
import pandas as pd
import statsmodels.api as sm

from .errors import ConvergenceError

logger = logging.getLogger(__name__)

EXACT_ERROR = 1e-14  # every error below this: the sequence is exact, order reported as inf
TINY = 1e-300


@dataclass
class OrderFit:
    order: float
    intercept: float
    r2: float
    n_points: int


def fit_order_details(h: Sequence[float], err: Sequence[float]) -> OrderFit:
    """OLS fit of log err = c + p·log h."""
    h = np.asarray(h, dtype=float)
    e = np.abs(np.asarray(err, dtype=float))
    if h.shape != e.shape or h.size < 2:
        raise ValueError("fit_order needs two matching sequences of at least two points")
    if np.any(h <= 0):
        raise ValueError("step sizes must be positive")
    if np.all(e < EXACT_ERROR):
        return OrderFit(order=float("inf"), intercept=float("-inf"), r2=1.0, n_points=int(h.size))
    X = sm.add_constant(np.log(h))
    y = np.log(np.maximum(e, TINY))
    res = sm.OLS(y, X).fit()
    intercept, slope = (float(c) for c in res.params)
    # two points give a perfect fit and rsquared is nan for constant data
    r2 = float(res.rsquared) if np.isfinite(res.rsquared) else 1.0
    logger.debug("fitted order %.4f over %d points (R²=%.4f)", slope, h.size, r2)
    return OrderFit(order=slope, intercept=intercept, r2=r2, n_points=int(h.size))


def fit_order(h: Sequence[float], err: Sequence[float]) -> float:
    return fit_order_details(h, err).order


def require_convergent(h: Sequence[float], err: Sequence[float], label: str = "sequence") -> float:
    order = fit_order(h, err)
    if order <= 0:
        raise ConvergenceError(f"{label} does not converge: fitted order {order:.3f}")
    return order


def extrapolate_to_zero(h: Sequence[float], values: np.ndarray) -> np.ndarray:
    """Neville extrapolation of values(h) to h = 0, componentwise.

    values has shape (len(h), ...). Degree len(h)-1 interpolant.
    """
    x = np.asarray(h, dtype=float)
    P = [np.asarray(v) for v in values]
    if len(P) != x.size:
        raise ValueError("one value per step size")
    k = x.size
    for m in range(1, k):
        P = [(x[i + m] * P[i] - x[i] * P[i + 1]) / (x[i + m] - x[i]) for i in range(k - m)]
    return P[0]


def richardson(h1: float, v1, h2: float, v2, order: float):
    """Eliminate the leading h^order error term from two estimates."""
    r = (h1 / h2) ** order
    return (r * np.asarray(v2) - np.asarray(v1)) / (r - 1.0)


def convergence_table(h: Sequence[float], err: Sequence[float], step_label: str = "h") -> pd.DataFrame:
    """Per-step errors with the local order between consecutive rows."""
    h = np.asarray(h, dtype=float)
    e = np.abs(np.asarray(err, dtype=float))
    df = pd.DataFrame({step_label: h, "error": e})
    local = [np.nan]
    for i in range(1, len(h)):
        if e[i] > 0 and e[i - 1] > 0 and h[i] != h[i - 1]:
            local.append(float(np.log(e[i - 1] / e[i]) / np.log(h[i - 1] / h[i])))
        else:
            local.append(np.nan)
    df["local_order"] = local
    return df
