# src/clifford.py
"""
Clifford structure on the exterior algebra via the symbol identification.

Sign convention: e^i e^j + e^j e^i = -2 δ^{ij}. With this relation the
generators act skew-adjointly in the spinor representation and the quantized
complex volume element i^{n/2} e^1...e^n squares to +1.

sigma / quantize are the identity on the shared blade-basis arrays; only the
product differs (clifford_mul vs wedge).
"""

from __future__ import annotations

import logging
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError, IdentityMismatchError
from .exterior import (
    ATOL,
    Multivector,
    bilinear_product,
    blade_grades,
    check_dimension,
    grade_project,
)

logger = logging.getLogger(__name__)

EXP_MAX_TERMS = 400


def clifford_mul(a: Multivector, b: Multivector) -> Multivector:
    if a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    n = a.dimension
    return Multivector(n, bilinear_product(a.data, b.data, n, "clifford"))


def commutator(a: Multivector, b: Multivector) -> Multivector:
    return clifford_mul(a, b) - clifford_mul(b, a)


def sigma(a: Multivector) -> Multivector:
    """Symbol map Cl -> ∧: e^{i1}...e^{ij} -> e^{i1}∧...∧e^{ij}."""
    return Multivector(a.dimension, a.data)


def quantize(a: Multivector) -> Multivector:
    """Inverse of sigma."""
    return Multivector(a.dimension, a.data)


def reverse(a: Multivector) -> Multivector:
    g = blade_grades(a.dimension)
    sign = np.where((g * (g - 1) // 2) % 2, -1.0, 1.0)
    return Multivector(a.dimension, a.data * sign)


# ---------- spin(n) ----------

@lru_cache(maxsize=None)
def spin_pairs(n: int) -> Tuple[Tuple[int, int], ...]:
    """Orthonormal basis e^i e^j (i<j) of spin(n), lexicographic."""
    return tuple(combinations(range(1, check_dimension(n) + 1), 2))


def spin_dimension(n: int) -> int:
    return n * (n - 1) // 2


class SpinElement:
    """A = Σ_{i<j} a_ij e^i e^j in spin(n)."""

    __slots__ = ("_n", "_coords")
    __array_ufunc__ = None

    def __init__(self, dimension: int, coords: Iterable[float] | np.ndarray | None = None):
        n = check_dimension(dimension)
        d = spin_dimension(n)
        arr = np.zeros(d) if coords is None else np.array(coords, dtype=float).reshape(-1)
        if arr.shape != (d,):
            raise DimensionError(f"spin({n}) has dimension {d}, got {arr.size} coordinates")
        arr.setflags(write=False)
        self._n = n
        self._coords = arr

    @classmethod
    def from_mapping(cls, dimension: int, coefficients: Mapping[Tuple[int, int], float]) -> "SpinElement":
        n = check_dimension(dimension)
        index = {p: k for k, p in enumerate(spin_pairs(n))}
        arr = np.zeros(spin_dimension(n))
        for (i, j), value in coefficients.items():
            if not (1 <= i < j <= n):
                raise DimensionError(f"spin(n) key must satisfy 1 <= i < j <= {n}, got {(i, j)}")
            arr[index[(i, j)]] += float(value)
        return cls(n, arr)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "SpinElement":
        """From an antisymmetric coefficient matrix (upper triangle is used)."""
        m = np.asarray(matrix, dtype=float)
        n = check_dimension(m.shape[0])
        if np.max(np.abs(m + m.T), initial=0.0) > 1e-12:
            raise DomainError("coefficient matrix must be antisymmetric")
        return cls(n, [m[i - 1, j - 1] for i, j in spin_pairs(n)])

    @classmethod
    def from_multivector(cls, a: Multivector, atol: float = ATOL) -> "SpinElement":
        n = a.dimension
        rest = a - grade_project(a, 2)
        if rest.norm() > atol or np.max(np.abs(a.data.imag)) > atol:
            raise DomainError("multivector is not a real degree-2 element")
        return cls(n, [a[(i, j)].real for i, j in spin_pairs(n)])

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def coefficients(self) -> Dict[Tuple[int, int], float]:
        return {p: float(c) for p, c in zip(spin_pairs(self._n), self._coords) if c}

    def matrix(self) -> np.ndarray:
        m = np.zeros((self._n, self._n))
        for (i, j), c in zip(spin_pairs(self._n), self._coords):
            m[i - 1, j - 1] = c
            m[j - 1, i - 1] = -c
        return m

    def to_multivector(self) -> Multivector:
        out = np.zeros(1 << self._n, dtype=complex)
        for (i, j), c in zip(spin_pairs(self._n), self._coords):
            out[(1 << (i - 1)) | (1 << (j - 1))] = c
        return Multivector(self._n, out)

    def norm(self) -> float:
        return float(np.sqrt(self._coords @ self._coords))

    def __add__(self, other: "SpinElement") -> "SpinElement":
        _check_same(self, other)
        return SpinElement(self._n, self._coords + other._coords)

    def __sub__(self, other: "SpinElement") -> "SpinElement":
        _check_same(self, other)
        return SpinElement(self._n, self._coords - other._coords)

    def __neg__(self) -> "SpinElement":
        return SpinElement(self._n, -self._coords)

    def __mul__(self, c: float) -> "SpinElement":
        if not np.isscalar(c):
            return NotImplemented
        return SpinElement(self._n, self._coords * float(c))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SpinElement(n={self._n}, {self.coefficients})"


def _check_same(a, b) -> None:
    if a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


class AntisymMatrix:
    """Real n×n matrix M with M + Mᵀ = 0."""

    __slots__ = ("_m",)
    TOL = 1e-12

    def __init__(self, matrix: np.ndarray):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
        if np.max(np.abs(m + m.T), initial=0.0) > self.TOL * scale:
            raise DomainError("matrix is not antisymmetric")
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dimension(self) -> int:
        return self._m.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self) -> str:
        return f"AntisymMatrix({self._m.tolist()})"


def _as_multivector(A) -> Multivector:
    return A.to_multivector() if isinstance(A, SpinElement) else A


def exp_clifford(A: SpinElement | Multivector, tol: float = 1e-15, max_terms: int = EXP_MAX_TERMS) -> Multivector:
    """Σ A^k / k! under clifford_mul, stopped once a term's max coefficient drops below tol."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    a = _as_multivector(A)
    total = Multivector.scalar(a.dimension, 1.0)
    term = total
    for k in range(1, max_terms + 1):
        term = clifford_mul(term, a) / k
        total = total + term
        if term.norm() < tol:
            logger.debug("exp_clifford converged after %d terms", k)
            return total
    raise ConvergenceError(f"exp_clifford did not reach tol={tol:g} within {max_terms} terms")


def conjugate(B: SpinElement, a: Multivector, tol: float = 1e-15) -> Multivector:
    """exp(B) a exp(-B)."""
    g = exp_clifford(B, tol)
    g_inv = exp_clifford(-B, tol)
    return clifford_mul(clifford_mul(g, a), g_inv)


def tau(A: SpinElement) -> AntisymMatrix:
    """Matrix of v -> [A, v] on degree-1 elements (column k is the image of e^k)."""
    n = A.dimension
    a = A.to_multivector()
    cols = np.zeros((n, n))
    scale = max(1.0, A.norm())
    for k in range(n):
        ek = Multivector(n, np.eye(1 << n, dtype=complex)[1 << k])
        c = commutator(a, ek)
        leak = c - grade_project(c, 1)
        if leak.norm() > 1e-12 * scale or np.max(np.abs(c.data.imag)) > 1e-12 * scale:
            raise IdentityMismatchError("tau: commutator left degree 1", max(leak.norm(), float(np.max(np.abs(c.data.imag)))), 1e-12 * scale)
        cols[:, k] = [c.data[1 << j].real for j in range(n)]
    return AntisymMatrix(cols)


def spin_inner(A: SpinElement, B: SpinElement) -> float:
    """Σ_{i<j} a_ij b_ij: the blades e^i e^j are orthonormal."""
    _check_same(A, B)
    return float(A.coords @ B.coords)


@lru_cache(maxsize=None)
def structure_constants(n: int) -> np.ndarray:
    """C[p, q, r] with [E_p, E_q] = Σ_r C[p, q, r] E_r for the blade basis E_p = e^i e^j."""
    pairs = spin_pairs(n)
    d = len(pairs)
    basis = [SpinElement(n, np.eye(d)[p]).to_multivector() for p in range(d)]
    C = np.zeros((d, d, d))
    for p in range(d):
        for q in range(d):
            bracket = SpinElement.from_multivector(commutator(basis[p], basis[q]))
            C[p, q] = bracket.coords
    C.setflags(write=False)
    logger.debug("structure constants for spin(%d): %d nonzero", n, int(np.count_nonzero(C)))
    return C


def ad_matrix(A: SpinElement) -> np.ndarray:
    """Matrix of X -> [A, X] on spin(n) in the orthonormal blade basis (antisymmetric)."""
    C = structure_constants(A.dimension)
    return np.einsum("p,pqr->rq", A.coords, C)
