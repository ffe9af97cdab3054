# src/oracles.py
"""
Independent reference computations used by tests and the verification suites.

Nothing here goes through analytic_apply or det_power: the 1-D Mehler kernel
is checked against its Hermite eigenexpansion, and Â is rebuilt from the
scalar series of log(x/sinh x), a Leibniz determinant and plain wedge products.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConvergenceError, DomainError
from .exterior import Multivector, popcount, wedge
from .geometry import RiemannTensor
from .nilpotent import FormMatrix

logger = logging.getLogger(__name__)

# log(x / sinh x) = Σ_k LOG_SINHC[k-1] x^{2k}
LOG_SINHC = (Fraction(-1, 6), Fraction(1, 180), Fraction(-1, 2835), Fraction(1, 37800))

CRAMER_BOUND = 1.086435  # |h_k(x)| <= CRAMER_BOUND · π^{-1/4} for the normalized Hermite functions
TAIL_TOL = 1e-12
MAX_TERMS = 4000


def hermite_functions(N: int, x: float) -> np.ndarray:
    """h_0(x), ..., h_{N-1}(x), orthonormal in L²(R), by the stable three-term recurrence."""
    h = np.zeros(N)
    h[0] = math.pi ** -0.25 * math.exp(-0.5 * x * x)
    if N > 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for k in range(1, N - 1):
        h[k + 1] = math.sqrt(2.0 / (k + 1)) * x * h[k] - math.sqrt(k / (k + 1)) * h[k - 1]
    return h


def mehler_1d_closed(a: float, t: float, x: float, y: float) -> float:
    """Heat kernel of -d²/dx² + a²x²."""
    s = math.sinh(2.0 * a * t)
    c = math.cosh(2.0 * a * t)
    return math.sqrt(a / (2.0 * math.pi * s)) * math.exp(-a * ((x * x + y * y) * c - 2.0 * x * y) / (2.0 * s))


def spectral_terms(a: float, t: float) -> int:
    """Smallest N whose eigenexpansion tail is below TAIL_TOL."""
    amp = math.sqrt(a) * CRAMER_BOUND ** 2 / math.sqrt(math.pi)
    denom = 1.0 - math.exp(-2.0 * a * t)
    for N in range(1, MAX_TERMS + 1):
        if amp * math.exp(-a * (2 * N + 1) * t) / denom < TAIL_TOL:
            return N
    raise ConvergenceError(f"Mehler eigenexpansion tail above {TAIL_TOL:g} at the {MAX_TERMS}-term cap (a={a}, t={t})")


def mehler_1d_spectral(a: float, t: float, x: float, y: float, terms: int | None = None) -> float:
    """Σ_k e^{-a(2k+1)t} φ_k(x) φ_k(y), φ_k(x) = a^{1/4} h_k(√a x)."""
    N = spectral_terms(a, t) if terms is None else terms
    ra = math.sqrt(a)
    hx = hermite_functions(N, ra * x)
    hy = hermite_functions(N, ra * y)
    decay = np.exp(-a * (2.0 * np.arange(N) + 1.0) * t)
    logger.debug("Mehler eigenexpansion with %d terms", N)
    return float(ra * np.sum(decay * hx * hy))


def mehler_1d_oracle(a: float, t: float, x: float, y: float) -> Tuple[float, float]:
    if a <= 0 or t <= 0:
        raise DomainError(f"need a > 0 and t > 0, got a={a}, t={t}")
    return mehler_1d_closed(a, t, x, y), mehler_1d_spectral(a, t, x, y)


def free_heat_kernel(t: float, x: float, y: float) -> float:
    return (4.0 * math.pi * t) ** -0.5 * math.exp(-((x - y) ** 2) / (4.0 * t))


# ---------- Â by series ----------

MVMatrix = List[List[Multivector]]


def _mv_matmul(X: MVMatrix, Y: MVMatrix) -> MVMatrix:
    m = len(X)
    n = X[0][0].dimension
    out = [[Multivector(n) for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(m):
            acc = Multivector(n)
            for k in range(m):
                acc = acc + wedge(X[i][k], Y[k][j])
            out[i][j] = acc
    return out


def curvature_multivector_matrix(R: RiemannTensor) -> MVMatrix:
    """(R_x)_{kl} = Σ_{i<j} R_{ijkl} e^i∧e^j as plain Multivectors."""
    n = R.dimension
    rows: MVMatrix = []
    for k in range(n):
        row = []
        for l in range(n):
            coeffs = {(i + 1, j + 1): R.components[i, j, k, l] for i in range(n) for j in range(i + 1, n)}
            row.append(Multivector.from_mapping(n, coeffs))
        rows.append(row)
    return rows


def _mv_identity(m: int, n: int) -> MVMatrix:
    return [[Multivector.scalar(n, 1.0) if i == j else Multivector(n) for j in range(m)] for i in range(m)]


def _mv_axpy(Y: MVMatrix, X: MVMatrix, c: float) -> MVMatrix:
    """Y + c·X."""
    return [[y + x * c for y, x in zip(yr, xr)] for yr, xr in zip(Y, X)]


def ahat_series_oracle(R: RiemannTensor) -> Multivector:
    """det(exp L)^{1/2} with L = Σ_k c_k (R/2)^{2k}, c_k the Maclaurin coefficients of log(x/sinh x).

    exp L is summed as a matrix series, its determinant taken by the Leibniz
    expansion and the square root by the binomial series of (1 + N)^{1/2}.
    """
    n = R.dimension
    if n not in (2, 4, 6, 8):
        raise DomainError(f"Â series oracle supports n in (2, 4, 6, 8), got {n}")
    Rx = curvature_multivector_matrix(R)
    R2 = _mv_matmul(Rx, Rx)
    order = n // 4
    zero = [[Multivector(n) for _ in range(n)] for _ in range(n)]
    L, power = zero, R2
    for k in range(1, order + 1):
        if k > 1:
            power = _mv_matmul(power, R2)
        L = _mv_axpy(L, power, float(LOG_SINHC[k - 1]) / 4 ** k)
    # entries of L have degree >= 4, so L^m = 0 for 4m > n
    S, term = _mv_identity(n, n), _mv_identity(n, n)
    for m in range(1, order + 1):
        term = _mv_matmul(term, L)
        S = _mv_axpy(S, term, 1.0 / math.factorial(m))
    N = leibniz_det(S) - Multivector.scalar(n, 1.0)
    out = Multivector.scalar(n, 1.0)
    term, binom = Multivector.scalar(n, 1.0), 1.0
    for k in range(1, order + 1):
        binom *= (0.5 - (k - 1)) / k
        term = wedge(term, N)
        out = out + term * binom
    return out


def leibniz_det(M: FormMatrix | MVMatrix) -> Multivector:
    """Σ_π sgn(π) Π_i M[i, π(i)] over the even subalgebra (entries commute).

    Permutations are expanded row by row; a branch stops as soon as its
    partial product vanishes.
    """
    if isinstance(M, FormMatrix):
        rows = [[M.entry(i, j).to_multivector() for j in range(M.size)] for i in range(M.size)]
    else:
        rows = M
    m = len(rows)
    n = rows[0][0].dimension
    total = Multivector(n)

    def expand(i: int, used: int, prod: Multivector) -> None:
        nonlocal total
        if i == m:
            total = total + prod
            return
        for j in range(m):
            if used >> j & 1:
                continue
            nxt = wedge(prod, rows[i][j])
            if not np.any(nxt.data):
                continue
            # inversions added by π(i) = j
            if popcount(used >> (j + 1)) % 2:
                nxt = -nxt
            expand(i + 1, used | 1 << j, nxt)

    expand(0, 0, Multivector.scalar(n, 1.0))
    return total


def index_density_oracle(R: RiemannTensor, ahat: Optional[Multivector] = None) -> complex:
    """(2πi)^{-n/2} times the top coefficient of the series Â-form."""
    n = R.dimension
    if ahat is None:
        ahat = ahat_series_oracle(R)
    return (2j * math.pi) ** (-(n // 2)) * complex(ahat.data[-1])
