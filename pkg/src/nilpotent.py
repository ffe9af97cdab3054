# src/nilpotent.py
"""
Grassmann calculus on the commutative ring of even forms.

EvenForm stores real coefficients on the even blades only (2^{n-1} of them).
FormMatrix is an m×m matrix with EvenForm entries, stored as an (m, m, 2^{n-1})
array; its body is the degree-0 slice.

Analytic matrix functions act on a FormMatrix through the left regular
representation of the ring: x ↦ (y ↦ x y) sends an m×m FormMatrix to a real
(m·2^{n-1})-square matrix and is an algebra homomorphism, so

    f(M) = first block column of f(regular_matrix(M))

holds exactly, with the nilpotent part summed to its full order n/2. The real
matrix function comes from scipy.linalg: expm (and the augmented-matrix form of
(e^x - 1)/x for the sinh/expm1 family), logm, sqrtm, with coth and tanh
ratios formed by solving against commuting factors. When the body is a multiple
of the identity at the primitive's expansion point the Taylor series is used
directly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial, pi
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import linalg, sparse
from scipy.special import bernoulli, binom

from .clifford import SpinElement, tau
from .errors import ConvergenceError, DimensionError, DomainError, IdentityMismatchError, SingularPrimitiveError
from .exterior import (
    ATOL,
    Multivector,
    blade_grades,
    check_dimension,
    exterior_power_matrix,
    indices_to_mask,
    mask_to_indices,
    reorder_sign,
)

logger = logging.getLogger(__name__)

IMAG_TOL = 1e-10


# ---------- even-blade ring ----------

@lru_cache(maxsize=None)
def even_masks(n: int) -> np.ndarray:
    g = blade_grades(n)
    m = np.flatnonzero(g % 2 == 0)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def even_position(n: int) -> Dict[int, int]:
    return {int(m): p for p, m in enumerate(even_masks(n))}


@lru_cache(maxsize=None)
def even_grades(n: int) -> np.ndarray:
    g = blade_grades(n)[even_masks(n)]
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def even_product_table(n: int) -> sparse.csr_matrix:
    masks = even_masks(n)
    pos = even_position(n)
    size = len(masks)
    rows, cols, vals = [], [], []
    for p, a in enumerate(masks):
        for q, b in enumerate(masks):
            if a & b:
                continue
            rows.append(pos[int(a | b)])
            cols.append(p * size + q)
            vals.append(reorder_sign(int(a), int(b)))
    return sparse.csr_matrix((np.array(vals, dtype=float), (rows, cols)), shape=(size, size * size))


def ring_mul(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    """Elementwise ring product of arrays whose last axis is the even-blade axis."""
    x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
    size = x.shape[-1]
    lead = x.shape[:-1]
    outer = (x[..., :, None] * y[..., None, :]).reshape(-1, size * size)
    out = even_product_table(n) @ outer.T
    return np.asarray(out.T).reshape(*lead, size)


def ring_matmul(X: np.ndarray, Y: np.ndarray, n: int) -> np.ndarray:
    """Matrix product over the ring: (..., m, k, E) @ (..., k, p, E) -> (..., m, p, E)."""
    outer = np.einsum("...ijA,...jkB->...ikAB", X, Y)
    size = X.shape[-1]
    lead = outer.shape[:-2]
    out = even_product_table(n) @ outer.reshape(-1, size * size).T
    return np.asarray(out.T).reshape(*lead, size)


# ---------- EvenForm ----------

class EvenForm:
    """Even-degree form with real coefficients; a commutative ring element."""

    __slots__ = ("_n", "_data")
    __array_ufunc__ = None

    def __init__(self, dimension: int, data: Sequence[float] | np.ndarray | None = None):
        n = check_dimension(dimension)
        size = len(even_masks(n))
        arr = np.zeros(size) if data is None else np.array(data, dtype=float)
        if arr.shape != (size,):
            raise DimensionError(f"expected {size} even coefficients for n={n}, got shape {arr.shape}")
        arr.setflags(write=False)
        self._n = n
        self._data = arr

    @classmethod
    def scalar(cls, dimension: int, value: float = 1.0) -> "EvenForm":
        n = check_dimension(dimension)
        arr = np.zeros(len(even_masks(n)))
        arr[0] = value
        return cls(n, arr)

    @classmethod
    def blade(cls, dimension: int, indices: Iterable[int], coefficient: float = 1.0) -> "EvenForm":
        n = check_dimension(dimension)
        sign, mask = indices_to_mask(tuple(indices), n)
        arr = np.zeros(len(even_masks(n)))
        if sign:
            if bin(mask).count("1") % 2:
                raise DomainError("EvenForm blades must have even degree")
            arr[even_position(n)[mask]] = sign * coefficient
        return cls(n, arr)

    @classmethod
    def from_multivector(cls, a: Multivector, atol: float = 1e-10) -> "EvenForm":
        if not a.is_even(atol):
            raise DomainError("multivector has odd-degree components")
        if np.max(np.abs(a.data.imag)) > atol:
            raise DomainError("EvenForm coefficients must be real")
        return cls(a.dimension, a.data.real[even_masks(a.dimension)])

    def to_multivector(self) -> Multivector:
        out = np.zeros(1 << self._n, dtype=complex)
        out[even_masks(self._n)] = self._data
        return Multivector(self._n, out)

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def body(self) -> float:
        return float(self._data[0])

    @property
    def coefficients(self) -> Dict[tuple, float]:
        masks = even_masks(self._n)
        return {mask_to_indices(int(masks[p])): float(self._data[p]) for p in np.flatnonzero(self._data)}

    def nilpotent(self) -> "EvenForm":
        arr = self._data.copy()
        arr[0] = 0.0
        return EvenForm(self._n, arr)

    def degree_part(self, k: int) -> "EvenForm":
        return EvenForm(self._n, np.where(even_grades(self._n) == k, self._data, 0.0))

    def coefficient(self, indices: Iterable[int]) -> float:
        sign, mask = indices_to_mask(tuple(indices), self._n)
        pos = even_position(self._n).get(mask)
        return sign * float(self._data[pos]) if sign and pos is not None else 0.0

    def top(self) -> float:
        return float(self._data[-1])

    def norm(self) -> float:
        return float(np.max(np.abs(self._data)))

    def allclose(self, other: "EvenForm", atol: float = ATOL) -> bool:
        _same(self, other)
        return bool(np.max(np.abs(self._data - other._data)) <= atol)

    # ring structure
    def _coerce(self, other) -> Optional["EvenForm"]:
        if isinstance(other, EvenForm):
            _same(self, other)
            return other
        if np.isscalar(other):
            return EvenForm.scalar(self._n, float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return EvenForm(self._n, self._data + o._data)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return EvenForm(self._n, self._data - o._data)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return EvenForm(self._n, -self._data)

    def __mul__(self, other):
        if np.isscalar(other):
            return EvenForm(self._n, self._data * float(other))
        if isinstance(other, EvenForm):
            _same(self, other)
            return EvenForm(self._n, ring_mul(self._data, other._data, self._n))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return EvenForm(self._n, self._data / float(other))
        if isinstance(other, EvenForm):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)):
            return self.power(float(k))
        base = self if k >= 0 else self.inverse()
        out = EvenForm.scalar(self._n, 1.0)
        for _ in range(abs(int(k))):
            out = out * base
        return out

    def _nil_series(self, coeffs: Sequence[float]) -> "EvenForm":
        """Σ_k coeffs[k] N^k with N the nilpotent part; exact after n/2 terms."""
        nil = self.nilpotent()
        out = EvenForm.scalar(self._n, coeffs[0])
        term = EvenForm.scalar(self._n, 1.0)
        for k in range(1, min(len(coeffs), self._n // 2 + 1)):
            term = term * nil
            out = out + term * coeffs[k]
        return out

    def exp(self) -> "EvenForm":
        K = self._n // 2
        return self._nil_series([1.0 / factorial(k) for k in range(K + 1)]) * np.exp(self.body)

    def inverse(self) -> "EvenForm":
        b = self.body
        if b == 0.0:
            raise SingularPrimitiveError("EvenForm with zero body is not invertible")
        K = self._n // 2
        return self._nil_series([(-1.0) ** k / b ** (k + 1) for k in range(K + 1)])

    def power(self, p: float) -> "EvenForm":
        b = self.body
        if b <= 0.0:
            raise DomainError(f"real power of an EvenForm needs a positive body, got {b}")
        K = self._n // 2
        return self._nil_series([binom(p, k) * b ** (p - k) for k in range(K + 1)])

    def apply(self, f: "str | Primitive") -> "EvenForm":
        m = FormMatrix(self._n, self._data.reshape(1, 1, -1))
        return analytic_apply(f, m).entry(0, 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EvenForm):
            return NotImplemented
        return self._n == other._n and bool(np.array_equal(self._data, other._data))

    def __hash__(self):
        return hash((self._n, self._data.tobytes()))

    def __repr__(self) -> str:
        terms = []
        for key, c in sorted(self.coefficients.items(), key=lambda kv: (len(kv[0]), kv[0])):
            label = "e" + "".join(str(i) for i in key) if key else "1"
            terms.append(f"({c:.6g}){label}")
        return f"EvenForm(n={self._n}, " + (" + ".join(terms) or "0") + ")"


def _same(a, b) -> None:
    if a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


# ---------- FormMatrix ----------

class FormMatrix:
    """Square matrix with EvenForm entries, stored as (m, m, 2^{n-1})."""

    __slots__ = ("_n", "_data")
    __array_ufunc__ = None

    def __init__(self, dimension: int, data: np.ndarray):
        n = check_dimension(dimension)
        arr = np.array(data, dtype=float)
        size = len(even_masks(n))
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != size:
            raise DimensionError(f"FormMatrix data must have shape (m, m, {size}), got {arr.shape}")
        arr.setflags(write=False)
        self._n = n
        self._data = arr

    @classmethod
    def zeros(cls, dimension: int, size: int) -> "FormMatrix":
        n = check_dimension(dimension)
        return cls(n, np.zeros((size, size, len(even_masks(n)))))

    @classmethod
    def from_body(cls, dimension: int, body: np.ndarray) -> "FormMatrix":
        body = np.asarray(body, dtype=float)
        n = check_dimension(dimension)
        arr = np.zeros(body.shape + (len(even_masks(n)),))
        arr[..., 0] = body
        return cls(n, arr)

    @classmethod
    def identity(cls, dimension: int, size: int) -> "FormMatrix":
        return cls.from_body(dimension, np.eye(size))

    @classmethod
    def from_entries(cls, dimension: int, entries: Sequence[Sequence[EvenForm | float]]) -> "FormMatrix":
        n = check_dimension(dimension)
        m = len(entries)
        arr = np.zeros((m, m, len(even_masks(n))))
        for i, row in enumerate(entries):
            if len(row) != m:
                raise DimensionError("FormMatrix must be square")
            for j, e in enumerate(row):
                if isinstance(e, EvenForm):
                    _same(e, EvenForm.scalar(n))
                    arr[i, j] = e.data
                else:
                    arr[i, j, 0] = float(e)
        return cls(n, arr)

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def size(self) -> int:
        return self._data.shape[0]

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def body(self) -> np.ndarray:
        return self._data[..., 0].copy()

    def nilpotent_part(self) -> "FormMatrix":
        arr = self._data.copy()
        arr[..., 0] = 0.0
        return FormMatrix(self._n, arr)

    def entry(self, i: int, j: int) -> EvenForm:
        return EvenForm(self._n, self._data[i, j])

    def transpose(self) -> "FormMatrix":
        return FormMatrix(self._n, self._data.transpose(1, 0, 2))

    def trace(self) -> EvenForm:
        return EvenForm(self._n, np.einsum("iiE->E", self._data))

    def quadratic(self, v: Sequence[float]) -> EvenForm:
        """⟨v, M v⟩ = Σ_kl v_k M_kl v_l."""
        v = np.asarray(getattr(v, "components", v), dtype=float)
        if v.shape != (self.size,):
            raise DimensionError(f"vector of length {v.size} against {self.size}x{self.size} matrix")
        return EvenForm(self._n, np.einsum("k,klE,l->E", v, self._data, v))

    def is_antisymmetric(self, atol: float = ATOL) -> bool:
        return bool(np.max(np.abs(self._data + self._data.transpose(1, 0, 2)), initial=0.0) <= atol)

    def allclose(self, other: "FormMatrix", atol: float = ATOL) -> bool:
        _same(self, other)
        return self._data.shape == other._data.shape and bool(np.max(np.abs(self._data - other._data)) <= atol)

    def __matmul__(self, other: "FormMatrix") -> "FormMatrix":
        _same(self, other)
        return FormMatrix(self._n, ring_matmul(self._data, other._data, self._n))

    def __add__(self, other):
        if isinstance(other, FormMatrix):
            _same(self, other)
            return FormMatrix(self._n, self._data + other._data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FormMatrix):
            _same(self, other)
            return FormMatrix(self._n, self._data - other._data)
        return NotImplemented

    def __neg__(self):
        return FormMatrix(self._n, -self._data)

    def __mul__(self, c):
        if np.isscalar(c):
            return FormMatrix(self._n, self._data * float(c))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if np.isscalar(c):
            return FormMatrix(self._n, self._data / float(c))
        return NotImplemented

    def inverse(self) -> "FormMatrix":
        """(B + N)^{-1} = Σ_k (-B^{-1} N)^k B^{-1}."""
        B = self.body
        if np.linalg.matrix_rank(B) < self.size:
            raise SingularPrimitiveError("FormMatrix body is singular")
        Binv = np.linalg.inv(B)
        nil = self.nilpotent_part()._data
        Binv_f = FormMatrix.from_body(self._n, Binv)._data
        L = -np.einsum("ij,jkE->ikE", Binv, nil)
        term = Binv_f
        total = Binv_f.copy()
        for _ in range(self._n // 2):
            term = ring_matmul(L, term, self._n)
            if not np.any(term):
                break
            total = total + term
        return FormMatrix(self._n, total)

    def __repr__(self) -> str:
        return f"FormMatrix(n={self._n}, size={self.size})"


# ---------- analytic primitives ----------

def _entire(_: complex) -> float:
    return float("inf")


@dataclass(frozen=True)
class Primitive:
    """Scalar analytic function with its reference expansion.

    `series(K)` returns the first K+1 Taylor coefficients about `center`;
    `radius` is the convergence radius of that expansion. `singular_distance(c)`
    gives the distance from c to the nearest pole or branch point.
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    series: Callable[[int], np.ndarray]
    center: float
    radius: float
    singular_distance: Callable[[complex], float] = field(default=_entire)
    singular_points: Callable[[np.ndarray], np.ndarray] = field(default=lambda z: np.full(np.shape(z), np.inf))
    matrix_function: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=complex))

    def reference(self, z, order: int = 30):
        """Truncated reference expansion about `center`."""
        z = np.asarray(z, dtype=complex)
        return P.polyval(z - self.center, self.series(order))

    @property
    def entire(self) -> bool:
        return np.isinf(self.radius)


def _guarded(fn: Callable, coeffs: Callable[[int], np.ndarray], cutoff: float = 1e-4):
    """Evaluate fn away from 0 and the Maclaurin series near it (removable singularity)."""
    c = coeffs(10)

    def evaluate(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.empty_like(z)
        small = np.abs(z) < cutoff
        with np.errstate(all="ignore"):
            out[~small] = fn(z[~small])
        out[small] = P.polyval(z[small], c)
        return out

    return evaluate


def _even_series(coeff: Callable[[int], float]) -> Callable[[int], np.ndarray]:
    def series(K: int) -> np.ndarray:
        out = np.zeros(K + 1)
        out[0::2] = [coeff(j) for j in range(K // 2 + 1)]
        return out

    return series


def _pole_distance(offset: float, skip_zero: bool) -> Callable[[complex], float]:
    """Distance to the poles iπ(k + offset)."""

    def dist(c: complex) -> float:
        k0 = int(np.round(c.imag / pi - offset))
        ks = [k for k in range(k0 - 2, k0 + 3) if not (skip_zero and k == 0 and offset == 0.0)]
        return float(min(abs(c - 1j * pi * (k + offset)) for k in ks))

    return dist


def _pole_points(offset: float, skip_zero: bool) -> Callable[[np.ndarray], np.ndarray]:
    def dist(z: np.ndarray) -> np.ndarray:
        return np.array([_pole_distance(offset, skip_zero)(complex(x)) for x in np.ravel(z)]).reshape(np.shape(z))

    return dist


def _cut_distance(c: complex) -> float:
    """Distance to the branch cut (-inf, 0]."""
    return abs(c) if c.real > 0 else abs(c.imag)


def _cut_points(z: np.ndarray) -> np.ndarray:
    return np.array([_cut_distance(complex(x)) for x in np.ravel(z)]).reshape(np.shape(z))


@lru_cache(maxsize=None)
def _bernoulli(N: int) -> np.ndarray:
    return bernoulli(N)


def _xcoth_coeff(j: int) -> float:
    return 2.0 ** (2 * j) * _bernoulli(2 * j + 2)[2 * j] / factorial(2 * j)


def _tanhc_coeff(j: int) -> float:
    k = j + 1
    return 2.0 ** (2 * k) * (2.0 ** (2 * k) - 1) * _bernoulli(2 * k)[2 * k] / factorial(2 * k)


def _series(coeff: Callable[[int], float]) -> Callable[[int], np.ndarray]:
    return lambda K: np.array([coeff(k) for k in range(K + 1)], dtype=float)


# ---------- real matrix functions ----------

def _phi1(X: np.ndarray) -> np.ndarray:
    """(e^X - I) X^{-1} as the top-right block of expm([[X, I], [0, 0]])."""
    k = X.shape[0]
    aug = np.zeros((2 * k, 2 * k))
    aug[:k, :k] = X
    aug[:k, k:] = np.eye(k)
    return linalg.expm(aug)[:k, k:]


def _cosh_m(X: np.ndarray) -> np.ndarray:
    return 0.5 * (linalg.expm(X) + linalg.expm(-X))


def _sinhc_m(X: np.ndarray) -> np.ndarray:
    return 0.5 * (_phi1(X) + _phi1(-X))


def _xcoth_m(X: np.ndarray) -> np.ndarray:
    return np.linalg.solve(_sinhc_m(X), _cosh_m(X))


def _tanhc_m(X: np.ndarray) -> np.ndarray:
    return np.linalg.solve(_cosh_m(X), _sinhc_m(X))


def _build_primitives() -> Dict[str, Primitive]:
    prims: List[Primitive] = []

    exp_s = _series(lambda k: 1.0 / factorial(k))
    prims.append(Primitive("exp", np.exp, exp_s, 0.0, float("inf"), matrix_function=linalg.expm))

    cosh_s = _even_series(lambda j: 1.0 / factorial(2 * j))
    prims.append(Primitive("cosh", np.cosh, cosh_s, 0.0, float("inf"), matrix_function=_cosh_m))

    em1_s = _series(lambda k: (-1.0) ** k / factorial(k + 1))
    prims.append(Primitive("expm1_ratio", _guarded(lambda z: -np.expm1(-z) / z, em1_s), em1_s, 0.0, float("inf"),
                           matrix_function=lambda X: _phi1(-X)))

    sh_s = _even_series(lambda j: 1.0 / factorial(2 * j + 1))
    prims.append(Primitive("sinhc", _guarded(lambda z: np.sinh(z) / z, sh_s), sh_s, 0.0, float("inf"),
                           matrix_function=_sinhc_m))

    shh_s = _even_series(lambda j: 1.0 / (4.0 ** j * factorial(2 * j + 1)))
    prims.append(Primitive("sinhc_half", _guarded(lambda z: np.sinh(z / 2) / (z / 2), shh_s), shh_s, 0.0, float("inf"),
                           matrix_function=lambda X: _sinhc_m(0.5 * X)))

    xc_s = _even_series(_xcoth_coeff)
    prims.append(Primitive("xcoth", _guarded(lambda z: z / np.tanh(z), xc_s), xc_s, 0.0, pi,
                           _pole_distance(0.0, True), _pole_points(0.0, True), _xcoth_m))

    th_s = _even_series(_tanhc_coeff)
    prims.append(Primitive("tanhc", _guarded(lambda z: np.tanh(z) / z, th_s), th_s, 0.0, pi / 2,
                           _pole_distance(0.5, False), _pole_points(0.5, False), _tanhc_m))

    log_s = _series(lambda k: 0.0 if k == 0 else (-1.0) ** (k + 1) / k)
    prims.append(Primitive("log", np.log, log_s, 1.0, 1.0, _cut_distance, _cut_points, linalg.logm))

    sqrt_s = _series(lambda k: float(binom(0.5, k)))
    prims.append(Primitive("sqrt", np.sqrt, sqrt_s, 1.0, 1.0, _cut_distance, _cut_points, linalg.sqrtm))

    rec_s = _series(lambda k: (-1.0) ** k)
    prims.append(Primitive("reciprocal", lambda z: 1.0 / z, rec_s, 1.0, 1.0, lambda c: abs(c), np.abs, np.linalg.inv))

    return {p.name: p for p in prims}


PRIMITIVES: Dict[str, Primitive] = _build_primitives()


def get_primitive(f: "str | Primitive") -> Primitive:
    if isinstance(f, Primitive):
        return f
    try:
        return PRIMITIVES[f]
    except KeyError:
        raise DomainError(f"unknown analytic primitive {f!r}; known: {sorted(PRIMITIVES)}") from None


# ---------- analytic_apply ----------

@lru_cache(maxsize=None)
def _regular_table(n: int) -> np.ndarray:
    """T[a, p, c] = coefficient of blade a in ω_p ω_c."""
    size = len(even_masks(n))
    table = even_product_table(n).toarray().reshape(size, size, size)
    table.setflags(write=False)
    return table


def regular_matrix(M: FormMatrix) -> np.ndarray:
    """Real (m·D)×(m·D) image of M under x ↦ (y ↦ x y); an algebra homomorphism."""
    n, m = M.dimension, M.size
    D = M.data.shape[-1]
    return np.einsum("ijp,apc->iajc", M.data, _regular_table(n)).reshape(m * D, m * D)


def _from_regular(F: np.ndarray, n: int, m: int) -> np.ndarray:
    D = len(even_masks(n))
    return F.reshape(m, D, m, D)[:, :, :, 0].transpose(0, 2, 1)


def _series_apply(prim: Primitive, M: FormMatrix) -> FormMatrix:
    """f(cI + N) = Σ_k f_k N^k for a body equal to the expansion point; exact."""
    n, m = M.dimension, M.size
    K = n // 2
    coeffs = prim.series(K)
    nil = M.nilpotent_part().data
    out = np.zeros_like(nil)
    out[..., 0] = coeffs[0] * np.eye(m)
    power = FormMatrix.identity(n, m).data
    for k in range(1, K + 1):
        power = ring_matmul(power, nil, n)
        if not np.any(power):
            break
        out = out + coeffs[k] * power
    return FormMatrix(n, out)


def _matrix_function(prim: Primitive, X: np.ndarray) -> np.ndarray:
    if prim.matrix_function is not None:
        return prim.matrix_function(X)
    F, errest = linalg.funm(X, prim.evaluator, disp=False)
    if not np.isfinite(errest) or errest > 1e-10:
        raise ConvergenceError(f"{prim.name}: Schur–Parlett error estimate {errest:.2e}")
    return F


def analytic_apply(f: "str | Primitive", M: FormMatrix) -> FormMatrix:
    """f(M) over the even-form ring; the ordinary matrix function when M has no forms."""
    prim = get_primitive(f)
    n, m = M.dimension, M.size
    B = M.body
    eig = np.linalg.eigvals(B)

    if np.array_equal(B, prim.center * np.eye(m)):
        return _series_apply(prim, M)

    if np.any(prim.singular_points(eig) < 1e-12):
        raise SingularPrimitiveError(f"{prim.name}: body eigenvalue on a singularity ({eig})")
    center = complex(0.5 * (eig.real.min() + eig.real.max()), 0.5 * (eig.imag.min() + eig.imag.max()))
    spread = float(np.max(np.abs(eig - center)))
    if not prim.entire:
        sd = prim.singular_distance(center)
        if spread >= sd:
            raise DomainError(
                f"{prim.name}: body spectrum (spread {spread:.3g} about {center:.3g}) "
                f"reaches a singularity at distance {sd:.3g}"
            )

    has_forms = bool(np.any(M.nilpotent_part().data))
    X = regular_matrix(M) if has_forms else B
    logger.debug("analytic_apply %s: m=%d lifted size=%d spread=%.3g", prim.name, m, X.shape[0], spread)
    F = np.asarray(_matrix_function(prim, X))

    if np.iscomplexobj(F):
        residue = float(np.max(np.abs(F.imag), initial=0.0))
        tol = IMAG_TOL * max(1.0, float(np.max(np.abs(F.real), initial=0.0)))
        if residue > tol:
            raise IdentityMismatchError(f"{prim.name} of a real matrix: imaginary part", residue, tol)
        F = F.real
    if has_forms:
        return FormMatrix(n, _from_regular(F, n, m))
    return FormMatrix.from_body(n, F)


# ---------- determinants ----------

def det_power(M: FormMatrix, p: float) -> EvenForm:
    """det(M)^p = det(B)^p · exp(p · tr log(I + B^{-1} N))."""
    n, m = M.dimension, M.size
    B = M.body
    det_b = float(np.linalg.det(B))
    if det_b == 0.0:
        raise SingularPrimitiveError("determinant power of a FormMatrix with singular body")
    if det_b < 0.0 and not float(p).is_integer():
        raise DomainError(f"non-integer power {p} of a negative determinant")
    L = np.einsum("ij,jkE->ikE", np.linalg.inv(B), M.nilpotent_part().data)
    log_part = analytic_apply("log", FormMatrix.identity(n, m) + FormMatrix(n, L)).trace()
    scale = det_b ** p if det_b > 0 else det_b ** int(p)
    return (log_part * float(p)).exp() * scale


def det_form(M: FormMatrix) -> EvenForm:
    return det_power(M, 1.0)


def det_sqrt(M: FormMatrix) -> EvenForm:
    """exp(½ tr log M), principal branch; body must be symmetric positive definite."""
    B = M.body
    scale = max(1.0, float(np.max(np.abs(B))))
    if np.max(np.abs(B - B.T)) > 1e-12 * scale:
        raise DomainError("det_sqrt: body is not symmetric")
    if np.min(np.linalg.eigvalsh(B)) <= 0.0:
        raise DomainError("det_sqrt: body is not positive definite")
    return det_power(M, 0.5)


# ---------- ℋ(τ(A)) ----------

@dataclass(frozen=True, eq=False)
class HOperator:
    """ℋ(τ(A)) = det^{1/2}(sinhc X) det^{-1/2}(tanhc X) ∧(tanhc X)^{1/2}, X = τ(A)/2."""

    dimension: int
    scalar_factor: float
    root: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.scalar_factor * exterior_power_matrix(self.root)

    def __call__(self, a: Multivector) -> Multivector:
        if a.dimension != self.dimension:
            raise DimensionError(f"dimension mismatch: {a.dimension} vs {self.dimension}")
        return Multivector(self.dimension, self.matrix @ a.data)


def h_operator(A: SpinElement) -> HOperator:
    n = A.dimension
    X = tau(A).matrix / 2.0
    top = float(np.max(np.abs(np.linalg.eigvals(X)), initial=0.0))
    if top >= pi / 2:
        raise DomainError(f"h_operator: |eig(τ(A)/2)| = {top:.4f} >= π/2")
    Xf = FormMatrix.from_body(n, X)
    sinhc_x = analytic_apply("sinhc", Xf).body
    tanhc_f = analytic_apply("tanhc", Xf)
    root = analytic_apply("sqrt", tanhc_f).body
    factor = np.sqrt(np.linalg.det(sinhc_x)) / np.sqrt(np.linalg.det(tanhc_f.body))
    return HOperator(n, float(factor), root)
