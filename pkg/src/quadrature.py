# src/quadrature.py
"""
Gaussian–Grassmann integrals over spin(n).

    I_t(Ψ) = (4πt)^{-P/2} ∫ e^{-|A|²/4t} Ψ(A) δ_t σ(exp_C A) dA,   P = n(n-1)/2

The weight is the N(0, 2t·I) density, so I_t is an expectation over A with
per-coordinate variance 2t. Two rules: tensor Gauss–Hermite (A = 2√t·x at the
Hermite nodes) and Monte Carlo with a seeded numpy Generator. Nodes are
processed in fixed-size chunks and chunk sums are accumulated in order, so
results are reproducible bit for bit.

Only n ∈ {2, 4} is feasible (P = 1 and P = 6).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from models.schemas import QuadratureSpec

from .clifford import SpinElement, spin_pairs
from .composite import Expr, TauOmega, evaluate_pointwise, grassmann_eval
from .convergence import convergence_table, extrapolate_to_zero, require_convergent, richardson
from .errors import DimensionError, DomainError
from .exterior import Multivector, blade_grades, exp_wedge
from .nilpotent import h_operator
from .spinors import blade_matrices, clifford_from_matrices

logger = logging.getLogger(__name__)

FEASIBLE_DIMENSIONS = (2, 4)

Integrand = Union[Expr, Callable[[np.ndarray], np.ndarray]]


@lru_cache(maxsize=None)
def gauss_hermite_nodes(dim: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss–Hermite rule for E[f(X)], X ~ N(0, I/2): nodes (order^dim, dim), weights summing to 1."""
    if dim < 1 or order < 1:
        raise ValueError("dimension and order must be positive")
    x, w = np.polynomial.hermite.hermgauss(order)
    nodes = np.array(list(itertools.product(x, repeat=dim)))
    weights = np.prod(np.array(list(itertools.product(w, repeat=dim))), axis=1) * math.pi ** (-dim / 2)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    logger.debug("Gauss–Hermite rule dim=%d order=%d: %d nodes", dim, order, weights.size)
    return nodes, weights


def gauss_hermite_expectation(f: Callable[[np.ndarray], np.ndarray], dim: int, order: int, variance: float = 1.0) -> float:
    """E[f(X)] for X ~ N(0, variance·I) in R^dim; f takes a (B, dim) array."""
    if variance <= 0:
        raise DomainError("variance must be positive")
    nodes, weights = gauss_hermite_nodes(dim, order)
    vals = np.asarray(f(nodes * math.sqrt(2.0 * variance)), dtype=float)
    return float(weights @ vals)


def delta_t(a: Multivector, t: float) -> Multivector:
    """Scale the degree-j component by t^{-j/2}."""
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    scale = float(t) ** (-blade_grades(a.dimension) / 2.0)
    return Multivector(a.dimension, a.data * scale)


def sigma_exp_batch(points: np.ndarray, n: int) -> np.ndarray:
    """σ(exp_C A) blade coefficients for a (B, P) batch of spin(n) coordinates -> (B, 2^n)."""
    pairs = spin_pairs(n)
    mats = blade_matrices(n)
    gens = np.stack([mats[(1 << (i - 1)) | (1 << (j - 1))] for i, j in pairs])
    # ρ(A) is skew-Hermitian; exponentiate through the Hermitian i·ρ(A)
    H = 1j * np.einsum("bp,pxy->bxy", points, gens)
    w, U = np.linalg.eigh(H)
    expm = np.einsum("bxk,bk,byk->bxy", U, np.exp(-1j * w), U.conj())
    return clifford_from_matrices(expm, n)


@dataclass
class QuadratureResult:
    value: Multivector
    stderr: Optional[np.ndarray]
    nodes: int


def _infer_dimension(psi: Integrand, n: Optional[int]) -> int:
    if n is not None:
        return n
    if isinstance(psi, Expr):
        for node in psi.walk():
            if isinstance(node, TauOmega):
                return node.omega.dimension
    raise DimensionError("cannot infer n from the integrand; pass n explicitly")


def _point_values(psi: Integrand, pts: np.ndarray, n: int, v) -> np.ndarray:
    if isinstance(psi, Expr):
        return evaluate_pointwise(psi, pts, n, v=v)
    return np.asarray(psi(pts), dtype=float).reshape(-1)


def _sample_chunks(spec: QuadratureSpec, P: int, t: float):
    """(points, weights) chunks; Gauss–Hermite weights sum to 1, Monte Carlo weights are 1/N."""
    scale = 2.0 * math.sqrt(t)
    if spec.rule == "gauss_hermite":
        nodes, weights = gauss_hermite_nodes(P, spec.size)
        for s in range(0, weights.size, spec.chunk):
            yield nodes[s:s + spec.chunk] * scale, weights[s:s + spec.chunk]
    else:
        rng = np.random.default_rng(spec.seed)
        N = spec.size
        for s in range(0, N, spec.chunk):
            m = min(spec.chunk, N - s)
            pts = rng.normal(scale=math.sqrt(2.0 * t), size=(m, P))
            yield pts, np.full(m, 1.0 / N)


def gauss_grassmann_integral_with_error(
    psi: Integrand,
    t: Optional[float],
    spec: QuadratureSpec,
    n: Optional[int] = None,
    v=None,
) -> QuadratureResult:
    n = _infer_dimension(psi, n)
    if n not in FEASIBLE_DIMENSIONS:
        raise DimensionError(f"spin({n}) integration is infeasible; supported n: {FEASIBLE_DIMENSIONS}")
    t = spec.t if t is None else t
    if t is None or t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    if spec.exact_degree is not None and isinstance(psi, Expr):
        deg = psi.polynomial_degree()
        if deg is None or deg > spec.exact_degree:
            raise DomainError(f"exactness claimed for degree {spec.exact_degree} but the integrand has degree {deg}")

    P = len(spin_pairs(n))
    total = np.zeros(1 << n, dtype=complex)
    second = np.zeros(1 << n) if spec.rule == "monte_carlo" else None
    count = 0
    for pts, w in _sample_chunks(spec, P, t):
        vals = _point_values(psi, pts, n, v)
        sig = sigma_exp_batch(pts, n)
        contrib = (w * vals)[:, None] * sig
        total += contrib.sum(axis=0)
        if second is not None:
            sample = vals[:, None] * sig.real
            second += (sample ** 2).sum(axis=0)
        count += pts.shape[0]
    logger.debug("gauss_grassmann_integral n=%d t=%g rule=%s nodes=%d", n, t, spec.rule, count)

    stderr = None
    if second is not None:
        mean = total.real
        var = np.maximum(second / count - mean ** 2, 0.0)
        stderr = np.sqrt(var / max(count - 1, 1))
    scale = float(t) ** (-blade_grades(n) / 2.0)
    if stderr is not None:
        stderr = stderr * scale
    return QuadratureResult(Multivector(n, total * scale), stderr, count)


def gauss_grassmann_integral(psi: Integrand, t: Optional[float], spec: QuadratureSpec, n: Optional[int] = None, v=None) -> Multivector:
    return gauss_grassmann_integral_with_error(psi, t, spec, n=n, v=v).value


def completed_square_integral(psi: Integrand, t: float, spec: QuadratureSpec, n: Optional[int] = None, v=None) -> Multivector:
    """Same integral with δ_t σ(exp_C A) replaced pointwise by ℋ(τ(A)) exp_∧(σ(A)/t)."""
    n = _infer_dimension(psi, n)
    if n not in FEASIBLE_DIMENSIONS:
        raise DimensionError(f"spin({n}) integration is infeasible; supported n: {FEASIBLE_DIMENSIONS}")
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    P = len(spin_pairs(n))
    total = Multivector(n)
    for pts, w in _sample_chunks(spec, P, t):
        vals = _point_values(psi, pts, n, v)
        for a, weight, val in zip(pts, w, vals):
            A = SpinElement(n, a)
            H = h_operator(A)
            total = total + H(exp_wedge(A.to_multivector() * (1.0 / t))) * float(weight * val)
    return total


@dataclass
class LocalizationReport:
    n: int
    table: pd.DataFrame
    fitted_order: float
    limit_error: float
    richardson_error: float
    tolerance: float
    exact: bool
    passed: bool


def localization_limit_check(
    psi: Expr,
    t_grid: Sequence[float],
    spec: QuadratureSpec,
    n: Optional[int] = None,
    v=None,
    tol: float = 1e-6,
    order_min: float = 0.9,
    exact_tol: float = 1e-10,
) -> LocalizationReport:
    """Compare I_t(Ψ) with Ψ(2e∧e*) on a t-grid.

    The grid is refined with t_min/2 and the values are extrapolated to t = 0
    by polynomial (Neville) extrapolation; the limit error is measured there.
    The first-order Richardson estimate from the two finest steps is reported
    alongside. A fitted order ≤ 0 raises ConvergenceError.
    """
    n = _infer_dimension(psi, n)
    ts = sorted({float(t) for t in t_grid}, reverse=True)
    if len(ts) < 2 or ts[-1] <= 0:
        raise DomainError("t-grid needs at least two positive values")
    ts.append(ts[-1] / 2.0)
    ts = np.array(ts)
    target = grassmann_eval(psi, SpinElement(n), 2.0, v=v).to_multivector()
    values = [gauss_grassmann_integral(psi, float(t), spec, n=n, v=v) for t in ts]
    errors = np.array([float(np.max(np.abs(x.data - target.data))) for x in values])

    exact = bool(np.all(errors < exact_tol))
    order = float("inf") if exact else require_convergent(ts, errors, "localization")
    limit = extrapolate_to_zero(ts, np.stack([x.data for x in values]))
    limit_error = float(np.max(np.abs(limit - target.data)))
    rich = richardson(ts[-2], values[-2].data, ts[-1], values[-1].data, 1.0)
    richardson_error = float(np.max(np.abs(rich - target.data)))
    passed = exact or (order >= order_min and limit_error <= tol)
    logger.info("localization n=%d: order %.3f, extrapolated limit error %.2e", n, order, limit_error)
    table = convergence_table(ts, errors, "t")
    return LocalizationReport(n, table, order, limit_error, richardson_error, tol, exact, passed)
