# src/exterior.py
"""
Complexified exterior algebra over R^n in the blade basis.

Blades are encoded as bitmasks: bit k-1 set <=> e^k present. A Multivector is
a dense, read-only complex array of length 2^n indexed by mask; the mapping
view (`coefficients`) uses sorted 1-based index tuples as keys.

Product tables (sign, target blade) are built once per dimension and cached as
sparse gather matrices, so every bilinear product is a single sparse matvec on
the outer product of the operands. The Clifford product in clifford.py reuses
the same machinery with a different sign table.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import DimensionError

logger = logging.getLogger(__name__)

MAX_DIMENSION = 8
ATOL = 1e-12


# ---------- blade bookkeeping ----------

def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_to_indices(mask: int) -> Tuple[int, ...]:
    return tuple(k + 1 for k in range(mask.bit_length()) if mask >> k & 1)


def indices_to_mask(indices: Iterable[int], n: int) -> Tuple[int, int]:
    """(sign, mask) of the wedge of e^{i1}, e^{i2}, ... in the given order.

    Repeated indices give sign 0. Unsorted input is normalized by the parity of
    the sorting permutation.
    """
    idx = list(indices)
    for i in idx:
        if not 1 <= i <= n:
            raise DimensionError(f"blade index {i} outside 1..{n}")
    if len(set(idx)) != len(idx):
        return 0, 0
    inversions = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    mask = 0
    for i in idx:
        mask |= 1 << (i - 1)
    return (-1 if inversions % 2 else 1), mask


def reorder_sign(a: int, b: int) -> int:
    """Sign of moving the generators of blade b past those of blade a into sorted order."""
    swaps = 0
    a >>= 1
    while a:
        swaps += popcount(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


def check_dimension(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 2 or n % 2 or n > MAX_DIMENSION:
        raise DimensionError(f"dimension must be an even integer in [2, {MAX_DIMENSION}], got {n!r}")
    return int(n)


@lru_cache(maxsize=None)
def blade_grades(n: int) -> np.ndarray:
    g = np.array([popcount(m) for m in range(1 << n)], dtype=np.int64)
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def grade_masks(n: int, k: int) -> Tuple[int, ...]:
    """Masks of grade k in lexicographic order of their index tuples."""
    return tuple(sum(1 << (i - 1) for i in c) for c in combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def product_table(n: int, kind: str) -> sparse.csr_matrix:
    """Gather matrix G with G[target, a*N + b] = sign for the blade product e_a e_b.

    kind = "wedge": zero when blades overlap, target a|b.
    kind = "clifford": e^i e^i = -1, target a^b.
    """
    size = 1 << n
    rows, cols, vals = [], [], []
    for a in range(size):
        for b in range(size):
            common = a & b
            if kind == "wedge":
                if common:
                    continue
                sign = reorder_sign(a, b)
            elif kind == "clifford":
                sign = reorder_sign(a, b) * (-1 if popcount(common) & 1 else 1)
            else:
                raise ValueError(f"unknown product kind {kind!r}")
            rows.append(a ^ b)
            cols.append(a * size + b)
            vals.append(sign)
    logger.debug("built %s product table for n=%d (%d entries)", kind, n, len(vals))
    g = sparse.csr_matrix((np.array(vals, dtype=float), (rows, cols)), shape=(size, size * size))
    return g


def bilinear_product(x: np.ndarray, y: np.ndarray, n: int, kind: str) -> np.ndarray:
    """Blade-basis product of coefficient arrays with trailing axis 2^n (broadcasts over leading axes)."""
    size = 1 << n
    x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
    lead = x.shape[:-1]
    outer = (x[..., :, None] * y[..., None, :]).reshape(-1, size * size)
    out = product_table(n, kind) @ outer.T
    return np.asarray(out.T).reshape(*lead, size)


# ---------- value types ----------

class Multivector:
    """Element of the complexified exterior algebra over R^n (immutable)."""

    __slots__ = ("_n", "_data")
    __array_ufunc__ = None

    def __init__(self, dimension: int, data: Sequence[complex] | np.ndarray | None = None):
        n = check_dimension(dimension)
        size = 1 << n
        if data is None:
            arr = np.zeros(size, dtype=complex)
        else:
            arr = np.array(data, dtype=complex)
            if arr.shape != (size,):
                raise DimensionError(f"expected {size} blade coefficients for n={n}, got shape {arr.shape}")
        arr.setflags(write=False)
        self._n = n
        self._data = arr

    # constructors
    @classmethod
    def from_mapping(cls, dimension: int, coefficients: Mapping[Tuple[int, ...], complex]) -> "Multivector":
        n = check_dimension(dimension)
        arr = np.zeros(1 << n, dtype=complex)
        for key, value in coefficients.items():
            sign, mask = indices_to_mask(tuple(key), n)
            arr[mask] += sign * complex(value)
        return cls(n, arr)

    @classmethod
    def blade(cls, dimension: int, indices: Iterable[int], coefficient: complex = 1.0) -> "Multivector":
        return cls.from_mapping(dimension, {tuple(indices): coefficient})

    @classmethod
    def scalar(cls, dimension: int, value: complex = 1.0) -> "Multivector":
        return cls.from_mapping(dimension, {(): value})

    @classmethod
    def top(cls, dimension: int, coefficient: complex = 1.0) -> "Multivector":
        return cls.blade(dimension, range(1, dimension + 1), coefficient)

    # views
    @property
    def dimension(self) -> int:
        return self._n

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def coefficients(self) -> Dict[Tuple[int, ...], complex]:
        nz = np.flatnonzero(self._data)
        return {mask_to_indices(int(m)): complex(self._data[m]) for m in nz}

    def __getitem__(self, indices: Iterable[int]) -> complex:
        sign, mask = indices_to_mask(tuple(indices), self._n)
        return sign * complex(self._data[mask]) if sign else 0j

    def grade(self, k: int) -> "Multivector":
        return grade_project(self, k)

    def grades(self) -> Tuple[int, ...]:
        g = blade_grades(self._n)[np.abs(self._data) > 0]
        return tuple(sorted(set(int(x) for x in g)))

    def scalar_part(self) -> complex:
        return complex(self._data[0])

    def is_even(self, atol: float = ATOL) -> bool:
        return bool(np.all(np.abs(self._data[blade_grades(self._n) % 2 == 1]) <= atol))

    def norm(self) -> float:
        """Max-abs coefficient norm."""
        return float(np.max(np.abs(self._data))) if self._data.size else 0.0

    def allclose(self, other: "Multivector", atol: float = ATOL) -> bool:
        _same_dimension(self, other)
        return bool(np.max(np.abs(self._data - other._data)) <= atol)

    # arithmetic
    def __add__(self, other):
        if isinstance(other, Multivector):
            _same_dimension(self, other)
            return Multivector(self._n, self._data + other._data)
        if np.isscalar(other):
            return self + Multivector.scalar(self._n, other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Multivector):
            _same_dimension(self, other)
            return Multivector(self._n, self._data - other._data)
        if np.isscalar(other):
            return self - Multivector.scalar(self._n, other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self._n, -self._data)

    def __mul__(self, other):
        if np.isscalar(other):
            return Multivector(self._n, self._data * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self._n, self._data / other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        return self._n == other._n and bool(np.array_equal(self._data, other._data))

    def __hash__(self):
        return hash((self._n, self._data.tobytes()))

    def __repr__(self) -> str:
        terms = []
        for key, c in sorted(self.coefficients.items(), key=lambda kv: (len(kv[0]), kv[0])):
            label = "e" + "".join(str(i) for i in key) if key else "1"
            terms.append(f"({c:.6g}){label}")
        return f"Multivector(n={self._n}, " + (" + ".join(terms) or "0") + ")"


class Vector:
    """Real vector of R^n in the orthonormal frame."""

    __slots__ = ("_components",)

    def __init__(self, components: Sequence[float]):
        arr = np.array(components, dtype=float).reshape(-1)
        check_dimension(arr.size)
        arr.setflags(write=False)
        self._components = arr

    @classmethod
    def basis(cls, dimension: int, k: int) -> "Vector":
        arr = np.zeros(check_dimension(dimension))
        arr[k - 1] = 1.0
        return cls(arr)

    @classmethod
    def zeros(cls, dimension: int) -> "Vector":
        return cls(np.zeros(check_dimension(dimension)))

    @property
    def dimension(self) -> int:
        return int(self._components.size)

    @property
    def components(self) -> np.ndarray:
        return self._components

    def norm_squared(self) -> float:
        return float(self._components @ self._components)

    def to_multivector(self) -> Multivector:
        n = self.dimension
        arr = np.zeros(1 << n, dtype=complex)
        for k in range(n):
            arr[1 << k] = self._components[k]
        return Multivector(n, arr)

    def __len__(self) -> int:
        return self.dimension

    def __repr__(self) -> str:
        return f"Vector({self._components.tolist()})"


def _same_dimension(a, b) -> int:
    if a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return a.dimension


# ---------- operations ----------

def wedge(a: Multivector, b: Multivector) -> Multivector:
    n = _same_dimension(a, b)
    return Multivector(n, bilinear_product(a.data, b.data, n, "wedge"))


@lru_cache(maxsize=None)
def _interior_maps(n: int):
    masks = np.arange(1 << n)
    maps = []
    for k in range(n):
        bit = 1 << k
        src = masks[(masks & bit) != 0]
        # position of e^{k+1} inside the sorted blade
        pos = np.array([popcount(int(m) & (bit - 1)) for m in src])
        maps.append((src, src ^ bit, np.where(pos % 2, -1.0, 1.0)))
    return maps


def interior(v: Vector, a: Multivector) -> Multivector:
    """Contraction i_v a, a graded derivation of degree -1 with i_v e^j = v_j."""
    n = _same_dimension(v, a)
    out = np.zeros(1 << n, dtype=complex)
    for k, (src, dst, sign) in enumerate(_interior_maps(n)):
        vk = v.components[k]
        if vk:
            np.add.at(out, dst, vk * sign * a.data[src])
    return Multivector(n, out)


def berezin(a: Multivector) -> complex:
    """Coefficient of the top blade e^1 ∧ ... ∧ e^n."""
    return complex(a.data[-1])


def grade_project(a: Multivector, k: int) -> Multivector:
    keep = blade_grades(a.dimension) == k
    return Multivector(a.dimension, np.where(keep, a.data, 0))


def wedge_power(a: Multivector, k: int) -> Multivector:
    if k < 0:
        raise ValueError("wedge power must be non-negative")
    out = Multivector.scalar(a.dimension, 1.0)
    for _ in range(k):
        out = wedge(out, a)
    return out


def exp_wedge(a: Multivector) -> Multivector:
    """Wedge exponential; exact because the positive-degree part is nilpotent."""
    n = a.dimension
    s = a.scalar_part()
    nil = a - s
    total = Multivector.scalar(n, 1.0)
    term = total
    for k in range(1, n + 1):
        term = wedge(term, nil) / k
        if not np.any(term.data):
            break
        total = total + term
    return total * np.exp(s)


@lru_cache(maxsize=None)
def _grade_index(n: int):
    return {k: {m: p for p, m in enumerate(grade_masks(n, k))} for k in range(n + 1)}


def exterior_power_matrix(B: np.ndarray) -> np.ndarray:
    """Matrix of ∧B on the full exterior algebra in the mask basis.

    B acts on covectors by e^i -> Σ_j B[j, i] e^j; on blade e^I it gives
    Σ_J det(B[J, I]) e^J over |J| = |I|.
    """
    B = np.asarray(B)
    n = check_dimension(B.shape[0])
    size = 1 << n
    out = np.zeros((size, size), dtype=np.result_type(B, float))
    out[0, 0] = 1.0
    for k in range(1, n + 1):
        masks = grade_masks(n, k)
        idx = [np.array(mask_to_indices(m)) - 1 for m in masks]
        for I, cols in zip(masks, idx):
            for J, rows in zip(masks, idx):
                out[J, I] = np.linalg.det(B[np.ix_(rows, cols)])
    return out


def apply_exterior_power(B: np.ndarray, a: Multivector) -> Multivector:
    return Multivector(a.dimension, exterior_power_matrix(B) @ a.data)
