# src/spinors.py
"""
Spinor representation rho of Cl(R^n) on ∧C^{n/2} (Fock basis).

Basis states are subsets S of {1..n/2}, stored as bitmasks. Generators pair the
coordinates (2k-1, 2k):

    rho(e^{2k-1}) = a_k - a_k†        rho(e^{2k}) = i (a_k + a_k†)

with a_k the fermionic annihilation operator (Jordan–Wigner sign). Both are
skew-Hermitian with square -I, and with this phase choice
str(rho(ω)) = (2/i)^{n/2} B(σ(ω)) holds with no extra constant.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import List

import numpy as np

from .errors import DimensionError, IdentityMismatchError
from .exterior import Multivector, check_dimension, mask_to_indices, popcount

logger = logging.getLogger(__name__)


class SpinorOperator:
    """Complex 2^{n/2} × 2^{n/2} matrix acting on ∧C^{n/2}."""

    __slots__ = ("_n", "_m")
    __array_ufunc__ = None

    def __init__(self, dimension: int, matrix: np.ndarray):
        n = check_dimension(dimension)
        m = np.array(matrix, dtype=complex)
        size = 1 << (n // 2)
        if m.shape != (size, size):
            raise DimensionError(f"spinor operators for n={n} are {size}x{size}, got {m.shape}")
        m.setflags(write=False)
        self._n = n
        self._m = m

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def __matmul__(self, other: "SpinorOperator") -> "SpinorOperator":
        _check(self, other)
        return SpinorOperator(self._n, self._m @ other._m)

    def __add__(self, other: "SpinorOperator") -> "SpinorOperator":
        _check(self, other)
        return SpinorOperator(self._n, self._m + other._m)

    def __sub__(self, other: "SpinorOperator") -> "SpinorOperator":
        _check(self, other)
        return SpinorOperator(self._n, self._m - other._m)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return SpinorOperator(self._n, self._m * c)

    __rmul__ = __mul__

    def trace(self) -> complex:
        return complex(np.trace(self._m))

    def adjoint(self) -> "SpinorOperator":
        return SpinorOperator(self._n, self._m.conj().T)

    def allclose(self, other: "SpinorOperator", atol: float = 1e-10) -> bool:
        _check(self, other)
        return bool(np.max(np.abs(self._m - other._m)) <= atol)

    def __repr__(self) -> str:
        return f"SpinorOperator(n={self._n}, shape={self._m.shape})"


def _check(a: SpinorOperator, b: SpinorOperator) -> None:
    if a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


@lru_cache(maxsize=None)
def fermion_operators(m: int) -> tuple:
    """Annihilation operators a_1..a_m on the 2^m Fock space."""
    size = 1 << m
    ops = []
    for k in range(m):
        bit = 1 << k
        a = np.zeros((size, size))
        for s in range(size):
            if s & bit:
                # Jordan–Wigner: one sign per occupied mode before k
                a[s ^ bit, s] = -1.0 if popcount(s & (bit - 1)) % 2 else 1.0
        a.setflags(write=False)
        ops.append(a)
    return tuple(ops)


@lru_cache(maxsize=None)
def gamma_matrices(n: int) -> tuple:
    """rho(e^1), ..., rho(e^n)."""
    n = check_dimension(n)
    gammas: List[np.ndarray] = []
    for a in fermion_operators(n // 2):
        ad = a.T
        g_odd = (a - ad).astype(complex)
        g_even = 1j * (a + ad)
        g_odd.setflags(write=False)
        g_even.setflags(write=False)
        gammas.extend([g_odd, g_even])
    return tuple(gammas)


@lru_cache(maxsize=None)
def blade_matrices(n: int) -> np.ndarray:
    """rho(e^I) for every blade mask I (ordered product of generators)."""
    gammas = gamma_matrices(n)
    size = 1 << (n // 2)
    mats = np.zeros((1 << n, size, size), dtype=complex)
    for mask in range(1 << n):
        m = np.eye(size, dtype=complex)
        for i in mask_to_indices(mask):
            m = m @ gammas[i - 1]
        mats[mask] = m
    mats.setflags(write=False)
    logger.debug("built %d spinor blade matrices for n=%d", 1 << n, n)
    return mats


def check_clifford_relations(n: int, atol: float = 1e-12) -> float:
    """Max deviation of rho(e^i)rho(e^j) + rho(e^j)rho(e^i) from -2δ^{ij} I."""
    gammas = gamma_matrices(n)
    eye = np.eye(gammas[0].shape[0])
    worst = 0.0
    for i, gi in enumerate(gammas):
        for j, gj in enumerate(gammas):
            target = -2.0 * eye if i == j else 0.0 * eye
            worst = max(worst, float(np.max(np.abs(gi @ gj + gj @ gi - target))))
    if worst > atol:
        raise IdentityMismatchError("Clifford relations", worst, atol)
    return worst


def rho(a: Multivector) -> SpinorOperator:
    mats = blade_matrices(a.dimension)
    return SpinorOperator(a.dimension, np.tensordot(a.data, mats, axes=1))


def clifford_from_matrices(T: np.ndarray, n: int) -> np.ndarray:
    """Blade coefficients of stacked spinor matrices (..., d, d) -> (..., 2^n)."""
    mats = blade_matrices(n)
    d = mats.shape[1]
    # rho(e^I) is unitary and the family is Hilbert–Schmidt orthogonal
    return np.einsum("Iab,...ab->...I", mats.conj(), np.asarray(T)) / d


def clifford_from_matrix(T: SpinorOperator) -> Multivector:
    return Multivector(T.dimension, clifford_from_matrices(T.matrix, T.dimension))


def chirality(n: int) -> SpinorOperator:
    """rho(i^{n/2} e^1...e^n)."""
    n = check_dimension(n)
    return rho(Multivector.top(n, 1j ** (n // 2)))


def supertrace(T: SpinorOperator) -> complex:
    return complex(np.trace(chirality(T.dimension).matrix @ T.matrix))


def supertrace_constant(n: int) -> complex:
    """(2/i)^{n/2}."""
    return (2 / 1j) ** (n // 2)
