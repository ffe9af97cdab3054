# src/composite.py
"""
AnalyticComposite: expression trees over the coordinates a_ij of spin(n).

A tree is evaluated by a backend:

- FormBackend: every coordinate a_ij becomes the EvenForm base_ij + scale·e^i∧e^j
  and the tree is evaluated over the even-form ring (grassmann_eval). Taylor
  data is exact because the increments are nilpotent.
- ArrayBackend: numeric evaluation on a batch of points in spin(n)
  (evaluate_pointwise), used by the quadrature layer.

Scalar nodes: Coord, VecComp, Const, Sum, Product, Power, Apply, DetPower,
Quadratic. Matrix nodes: TauOmega, AdMatrix, MatrixApply, MatInverse, MatScale.
Trees serialize to nested dicts (to_dict / from_dict) so fixtures can live in YAML.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .clifford import SpinElement, spin_pairs, structure_constants
from .errors import DimensionError, DomainError, SingularPrimitiveError
from .exterior import check_dimension
from .nilpotent import EvenForm, FormMatrix, analytic_apply, det_power, even_masks, get_primitive

logger = logging.getLogger(__name__)


# ---------- backends ----------

class FormBackend:
    """Scalars are EvenForm, matrices are FormMatrix."""

    def __init__(self, dimension: int, v: Optional[np.ndarray] = None):
        self.n = check_dimension(dimension)
        self.v = v

    def const(self, c: float) -> EvenForm:
        return EvenForm.scalar(self.n, c)

    def add(self, xs):
        out = xs[0]
        for x in xs[1:]:
            out = out + x
        return out

    def mul(self, xs):
        out = xs[0]
        for x in xs[1:]:
            out = out * x
        return out

    def power(self, x: EvenForm, k: int) -> EvenForm:
        return x ** k

    def apply(self, prim: str, x: EvenForm) -> EvenForm:
        return x.apply(prim)

    def tau_omega(self, coords, omega) -> FormMatrix:
        a = np.stack([c.data for c in coords])
        return FormMatrix(self.n, 2.0 * np.einsum("klp,pE->lkE", omega.data, a))

    def ad(self, coords) -> FormMatrix:
        a = np.stack([c.data for c in coords])
        return FormMatrix(self.n, np.einsum("pqr,pE->rqE", structure_constants(self.n), a))

    def mat_apply(self, prim: str, M: FormMatrix) -> FormMatrix:
        return analytic_apply(prim, M)

    def mat_inverse(self, M: FormMatrix) -> FormMatrix:
        return M.inverse()

    def mat_scale(self, M: FormMatrix, c: float) -> FormMatrix:
        return M * c

    def det_power(self, M: FormMatrix, p: float) -> EvenForm:
        return det_power(M, p)

    def quadratic(self, M: FormMatrix) -> EvenForm:
        if self.v is None:
            raise DomainError("composite uses the vector v but none was supplied")
        return M.quadratic(self.v)

    def vec(self, k: int) -> EvenForm:
        if self.v is None:
            raise DomainError("composite uses the vector v but none was supplied")
        return EvenForm.scalar(self.n, float(self.v[k - 1]))


def _is_antisymmetric(M: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    return bool(np.max(np.abs(M + np.swapaxes(M, -1, -2)), initial=0.0) <= 1e-12 * scale)


def _is_symmetric(M: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    return bool(np.max(np.abs(M - np.swapaxes(M, -1, -2)), initial=0.0) <= 1e-12 * scale)


def batched_matrix_function(prim_name: str, M: np.ndarray) -> np.ndarray:
    """f(M) for a stack of real matrices via eigendecomposition (eigh when M is normal-by-structure)."""
    prim = get_primitive(prim_name)
    if _is_antisymmetric(M):
        # iM is Hermitian: M = U diag(-i w) U^H
        w, U = np.linalg.eigh(1j * M)
        lam = -1j * w
        fl = _checked(prim, lam)
        out = np.einsum("...ij,...j,...kj->...ik", U, fl, U.conj())
    elif _is_symmetric(M):
        w, U = np.linalg.eigh(M)
        fl = _checked(prim, w.astype(complex))
        out = np.einsum("...ij,...j,...kj->...ik", U, fl, U)
    else:
        w, V = np.linalg.eig(M)
        fl = _checked(prim, w)
        out = np.einsum("...ij,...j,...jk->...ik", V, fl, np.linalg.inv(V))
    return out.real


def _checked(prim, lam: np.ndarray) -> np.ndarray:
    if np.any(prim.singular_points(lam) < 1e-12):
        raise SingularPrimitiveError(f"{prim.name}: eigenvalue on a singularity")
    return prim(lam)


class ArrayBackend:
    """Scalars are (B,) arrays, matrices are (B, m, m) arrays."""

    def __init__(self, dimension: int, batch: int, v: Optional[np.ndarray] = None):
        self.n = check_dimension(dimension)
        self.batch = batch
        self.v = v

    def const(self, c: float) -> np.ndarray:
        return np.full(self.batch, float(c))

    def add(self, xs):
        return np.sum(np.stack(xs), axis=0)

    def mul(self, xs):
        return np.prod(np.stack(xs), axis=0)

    def power(self, x: np.ndarray, k: int) -> np.ndarray:
        if k < 0 and np.any(x == 0):
            raise SingularPrimitiveError("negative power of zero")
        return x ** float(k)

    def apply(self, prim_name: str, x: np.ndarray) -> np.ndarray:
        prim = get_primitive(prim_name)
        z = np.asarray(x, dtype=complex)
        if np.any(prim.singular_points(z) < 1e-12):
            raise SingularPrimitiveError(f"{prim.name}: argument on a singularity")
        return prim(z).real

    def tau_omega(self, coords, omega) -> np.ndarray:
        return 2.0 * np.einsum("klp,Bp->Blk", omega.data, np.stack(coords, axis=-1))

    def ad(self, coords) -> np.ndarray:
        return np.einsum("pqr,Bp->Brq", structure_constants(self.n), np.stack(coords, axis=-1))

    def mat_apply(self, prim: str, M: np.ndarray) -> np.ndarray:
        return batched_matrix_function(prim, M)

    def mat_inverse(self, M: np.ndarray) -> np.ndarray:
        return np.linalg.inv(M)

    def mat_scale(self, M: np.ndarray, c: float) -> np.ndarray:
        return M * c

    def det_power(self, M: np.ndarray, p: float) -> np.ndarray:
        det = np.linalg.det(M)
        if not float(p).is_integer() and np.any(det <= 0):
            raise DomainError(f"non-integer power {p} of a non-positive determinant")
        return det ** p

    def quadratic(self, M: np.ndarray) -> np.ndarray:
        if self.v is None:
            raise DomainError("composite uses the vector v but none was supplied")
        return np.einsum("k,Bkl,l->B", self.v, M, self.v)

    def vec(self, k: int) -> np.ndarray:
        if self.v is None:
            raise DomainError("composite uses the vector v but none was supplied")
        return self.const(self.v[k - 1])


# ---------- nodes ----------

_NODES: Dict[str, type] = {}


def _register(cls):
    _NODES[cls.op] = cls
    return cls


def _wrap(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    if np.isscalar(x):
        return Const(float(x))
    raise TypeError(f"cannot use {type(x).__name__} in a composite")


class Expr:
    op: ClassVar[str] = ""
    kind: ClassVar[str] = "scalar"

    def evaluate(self, backend, coords):
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    def polynomial_degree(self) -> Optional[int]:
        """Degree in the coordinates a_ij, or None when not a polynomial."""
        return None

    def children(self) -> Tuple["Expr", ...]:
        return ()

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    def _scalar(self) -> "Expr":
        if self.kind != "scalar":
            raise TypeError(f"{self.op} is matrix-valued; arithmetic needs scalar nodes")
        return self

    def __add__(self, other):
        return Sum((self._scalar(), _wrap(other)._scalar()))

    __radd__ = __add__

    def __sub__(self, other):
        return Sum((self._scalar(), Product((Const(-1.0), _wrap(other)._scalar()))))

    def __rsub__(self, other):
        return _wrap(other) - self

    def __neg__(self):
        return Product((Const(-1.0), self._scalar()))

    def __mul__(self, other):
        return Product((self._scalar(), _wrap(other)._scalar()))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return Power(self._scalar(), int(k))


@_register
@dataclass(frozen=True)
class Coord(Expr):
    i: int
    j: int
    op: ClassVar[str] = "coord"

    def __post_init__(self):
        if not 1 <= self.i < self.j:
            raise DimensionError(f"coordinate a_ij needs 1 <= i < j, got ({self.i}, {self.j})")

    def evaluate(self, backend, coords):
        index = {p: k for k, p in enumerate(spin_pairs(backend.n))}
        try:
            return coords[index[(self.i, self.j)]]
        except KeyError:
            raise DimensionError(f"a_{self.i}{self.j} is not a coordinate of spin({backend.n})") from None

    def to_dict(self):
        return {"op": self.op, "i": self.i, "j": self.j}

    def polynomial_degree(self):
        return 1


@_register
@dataclass(frozen=True)
class VecComp(Expr):
    k: int
    op: ClassVar[str] = "vec"

    def evaluate(self, backend, coords):
        return backend.vec(self.k)

    def to_dict(self):
        return {"op": self.op, "k": self.k}

    def polynomial_degree(self):
        return 0


@_register
@dataclass(frozen=True)
class Const(Expr):
    value: float
    op: ClassVar[str] = "const"

    def evaluate(self, backend, coords):
        return backend.const(self.value)

    def to_dict(self):
        return {"op": self.op, "value": float(self.value)}

    def polynomial_degree(self):
        return 0


@_register
@dataclass(frozen=True)
class Sum(Expr):
    terms: Tuple[Expr, ...]
    op: ClassVar[str] = "sum"

    def evaluate(self, backend, coords):
        return backend.add([t.evaluate(backend, coords) for t in self.terms])

    def to_dict(self):
        return {"op": self.op, "terms": [t.to_dict() for t in self.terms]}

    def children(self):
        return self.terms

    def polynomial_degree(self):
        degs = [t.polynomial_degree() for t in self.terms]
        return None if None in degs else max(degs)


@_register
@dataclass(frozen=True)
class Product(Expr):
    factors: Tuple[Expr, ...]
    op: ClassVar[str] = "product"

    def evaluate(self, backend, coords):
        return backend.mul([f.evaluate(backend, coords) for f in self.factors])

    def to_dict(self):
        return {"op": self.op, "factors": [f.to_dict() for f in self.factors]}

    def children(self):
        return self.factors

    def polynomial_degree(self):
        degs = [f.polynomial_degree() for f in self.factors]
        return None if None in degs else sum(degs)


@_register
@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: int
    op: ClassVar[str] = "power"

    def evaluate(self, backend, coords):
        return backend.power(self.base.evaluate(backend, coords), self.exponent)

    def to_dict(self):
        return {"op": self.op, "base": self.base.to_dict(), "exponent": int(self.exponent)}

    def children(self):
        return (self.base,)

    def polynomial_degree(self):
        d = self.base.polynomial_degree()
        return None if d is None or self.exponent < 0 else d * self.exponent


@_register
@dataclass(frozen=True)
class Apply(Expr):
    primitive: str
    arg: Expr
    op: ClassVar[str] = "apply"

    def __post_init__(self):
        get_primitive(self.primitive)
        if self.arg.kind != "scalar":
            raise TypeError("Apply takes a scalar argument; use MatrixApply for matrices")

    def evaluate(self, backend, coords):
        return backend.apply(self.primitive, self.arg.evaluate(backend, coords))

    def to_dict(self):
        return {"op": self.op, "primitive": self.primitive, "arg": self.arg.to_dict()}

    def children(self):
        return (self.arg,)


@_register
@dataclass(frozen=True, eq=False)
class TauOmega(Expr):
    """τ(A·Ω): ⟨τ(A·Ω) e_k, e_l⟩ = 2⟨A, Ω(e_k, e_l)⟩."""

    omega: Any
    op: ClassVar[str] = "tau_omega"
    kind: ClassVar[str] = "matrix"

    def evaluate(self, backend, coords):
        return backend.tau_omega(coords, self.omega)

    def to_dict(self):
        return {"op": self.op, "omega": self.omega.to_dict()}


@_register
@dataclass(frozen=True)
class AdMatrix(Expr):
    """ad_A on spin(n) in the orthonormal blade basis."""

    op: ClassVar[str] = "ad"
    kind: ClassVar[str] = "matrix"

    def evaluate(self, backend, coords):
        return backend.ad(coords)

    def to_dict(self):
        return {"op": self.op}


@_register
@dataclass(frozen=True)
class MatrixApply(Expr):
    primitive: str
    arg: Expr
    op: ClassVar[str] = "matrix_apply"
    kind: ClassVar[str] = "matrix"

    def __post_init__(self):
        get_primitive(self.primitive)
        if self.arg.kind != "matrix":
            raise TypeError("MatrixApply takes a matrix argument")

    def evaluate(self, backend, coords):
        return backend.mat_apply(self.primitive, self.arg.evaluate(backend, coords))

    def to_dict(self):
        return {"op": self.op, "primitive": self.primitive, "arg": self.arg.to_dict()}

    def children(self):
        return (self.arg,)


@_register
@dataclass(frozen=True)
class MatInverse(Expr):
    arg: Expr
    op: ClassVar[str] = "inverse"
    kind: ClassVar[str] = "matrix"

    def evaluate(self, backend, coords):
        return backend.mat_inverse(self.arg.evaluate(backend, coords))

    def to_dict(self):
        return {"op": self.op, "arg": self.arg.to_dict()}

    def children(self):
        return (self.arg,)


@_register
@dataclass(frozen=True)
class MatScale(Expr):
    arg: Expr
    factor: float
    op: ClassVar[str] = "scale"
    kind: ClassVar[str] = "matrix"

    def evaluate(self, backend, coords):
        return backend.mat_scale(self.arg.evaluate(backend, coords), self.factor)

    def to_dict(self):
        return {"op": self.op, "arg": self.arg.to_dict(), "factor": float(self.factor)}

    def children(self):
        return (self.arg,)


@_register
@dataclass(frozen=True)
class DetPower(Expr):
    arg: Expr
    exponent: float
    op: ClassVar[str] = "det_power"

    def __post_init__(self):
        if self.arg.kind != "matrix":
            raise TypeError("DetPower takes a matrix argument")

    def evaluate(self, backend, coords):
        return backend.det_power(self.arg.evaluate(backend, coords), self.exponent)

    def to_dict(self):
        return {"op": self.op, "arg": self.arg.to_dict(), "exponent": float(self.exponent)}

    def children(self):
        return (self.arg,)


@_register
@dataclass(frozen=True)
class Quadratic(Expr):
    """⟨v, M v⟩."""

    arg: Expr
    op: ClassVar[str] = "quadratic"

    def __post_init__(self):
        if self.arg.kind != "matrix":
            raise TypeError("Quadratic takes a matrix argument")

    def evaluate(self, backend, coords):
        return backend.quadratic(self.arg.evaluate(backend, coords))

    def to_dict(self):
        return {"op": self.op, "arg": self.arg.to_dict()}

    def children(self):
        return (self.arg,)


def from_dict(d: Dict[str, Any]) -> Expr:
    op = d.get("op")
    if op not in _NODES:
        raise ValueError(f"unknown composite node {op!r}")
    if op == "coord":
        return Coord(int(d["i"]), int(d["j"]))
    if op == "vec":
        return VecComp(int(d["k"]))
    if op == "const":
        return Const(float(d["value"]))
    if op == "sum":
        return Sum(tuple(from_dict(t) for t in d["terms"]))
    if op == "product":
        return Product(tuple(from_dict(f) for f in d["factors"]))
    if op == "power":
        return Power(from_dict(d["base"]), int(d["exponent"]))
    if op in ("apply", "matrix_apply"):
        return _NODES[op](d["primitive"], from_dict(d["arg"]))
    if op == "tau_omega":
        from .geometry import CurvatureMap

        return TauOmega(CurvatureMap.from_dict(d["omega"]))
    if op == "ad":
        return AdMatrix()
    if op == "inverse":
        return MatInverse(from_dict(d["arg"]))
    if op == "scale":
        return MatScale(from_dict(d["arg"]), float(d["factor"]))
    if op == "det_power":
        return DetPower(from_dict(d["arg"]), float(d["exponent"]))
    return Quadratic(from_dict(d["arg"]))


def uses_vector(expr: Expr) -> bool:
    return any(isinstance(node, (VecComp, Quadratic)) for node in expr.walk())


# ---------- evaluation entry points ----------

def _vector_array(v, n: int) -> Optional[np.ndarray]:
    if v is None:
        return None
    arr = np.asarray(getattr(v, "components", v), dtype=float).reshape(-1)
    if arr.size != n:
        raise DimensionError(f"vector has {arr.size} components, expected {n}")
    return arr


def grassmann_eval(psi: Expr, base: SpinElement, scale: float = 2.0, v=None) -> EvenForm:
    """Ψ(base + scale·e∧e*): each a_ij becomes base_ij + scale·e^i∧e^j over the even-form ring."""
    if psi.kind != "scalar":
        raise TypeError("grassmann_eval needs a scalar-valued composite")
    n = base.dimension
    backend = FormBackend(n, _vector_array(v, n))
    coords = [
        EvenForm.scalar(n, float(b)) + EvenForm.blade(n, (i, j), scale)
        for (i, j), b in zip(spin_pairs(n), base.coords)
    ]
    out = psi.evaluate(backend, coords)
    return out


def evaluate_pointwise(psi: Expr, points: np.ndarray, dimension: int, v=None) -> np.ndarray:
    """Ψ on a batch of spin(n) points given as a (B, n(n-1)/2) coordinate array."""
    if psi.kind != "scalar":
        raise TypeError("evaluate_pointwise needs a scalar-valued composite")
    n = check_dimension(dimension)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != len(spin_pairs(n)):
        raise DimensionError(f"points must have {len(spin_pairs(n))} coordinates for n={n}")
    backend = ArrayBackend(n, pts.shape[0], _vector_array(v, n))
    coords = [pts[:, p] for p in range(pts.shape[1])]
    return np.asarray(psi.evaluate(backend, coords), dtype=float)
