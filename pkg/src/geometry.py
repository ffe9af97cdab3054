# src/geometry.py
"""
Pointwise geometry of the spin frame bundle: curvature data, the pairing
τ(A·Ω), the exponential-map differential, Φ₀ and the distance quadratic form,
plus the two Grassmann-evaluation identities

    Φ(2e∧e*) = det^{1/2}((R_x/2) / sinh(R_x/2))
    Ψ(2e∧e*) = ⟨v, (R_x/2) coth(R_x/2) v⟩

Normalization: Ω(e_k, e_l) = C_OMEGA · Σ_{i<j} R_{klij} e^i e^j with C_OMEGA = 1/2.
At A = 2e∧e* this makes τ(A·Ω) = -2 R_x, so τ/4 = -R_x/2 and τ/2 = -R_x;
both identities are even in R_x, so the overall sign is not observable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .clifford import AntisymMatrix, SpinElement, ad_matrix, spin_pairs
from .composite import (
    AdMatrix,
    DetPower,
    Expr,
    MatInverse,
    MatScale,
    MatrixApply,
    Quadratic,
    TauOmega,
    grassmann_eval,
)
from .errors import DimensionError, DomainError, IdentityMismatchError
from .exterior import Vector, check_dimension
from .nilpotent import EvenForm, FormMatrix, analytic_apply, det_sqrt, even_position

logger = logging.getLogger(__name__)

C_OMEGA = 0.5
RIEMANN_TOL = 1e-10
IDENTITY_TOL = 1e-10


class RiemannTensor:
    """Dense R_{ijkl} (0-based storage) with the algebraic curvature symmetries."""

    __slots__ = ("_n", "_r")

    def __init__(self, components: np.ndarray, tol: float = RIEMANN_TOL):
        r = np.array(components, dtype=float)
        if r.ndim != 4 or len(set(r.shape)) != 1:
            raise DimensionError(f"Riemann tensor must be n×n×n×n, got {r.shape}")
        n = check_dimension(r.shape[0])
        problems = riemann_violations(r)
        worst = max(problems.values())
        if worst > tol:
            name = max(problems, key=problems.get)
            raise DomainError(f"Riemann tensor violates {name} by {worst:.3e}")
        r.setflags(write=False)
        self._n = n
        self._r = r

    @classmethod
    def zeros(cls, dimension: int) -> "RiemannTensor":
        n = check_dimension(dimension)
        return cls(np.zeros((n,) * 4))

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def components(self) -> np.ndarray:
        return self._r

    def __getitem__(self, ijkl: Tuple[int, int, int, int]) -> float:
        i, j, k, l = ijkl
        return float(self._r[i - 1, j - 1, k - 1, l - 1])

    def scaled(self, c: float) -> "RiemannTensor":
        return RiemannTensor(self._r * c)

    def __add__(self, other: "RiemannTensor") -> "RiemannTensor":
        if other.dimension != self._n:
            raise DimensionError("dimension mismatch")
        return RiemannTensor(self._r + other._r)

    def is_zero(self) -> bool:
        return not np.any(self._r)

    def independent_components(self) -> List[Tuple[int, int, int, int, float]]:
        """Nonzero R_{ijkl} with i<j, k<l, (i,j) <= (k,l), 1-based."""
        out = []
        pairs = list(combinations(range(self._n), 2))
        for a, (i, j) in enumerate(pairs):
            for (k, l) in pairs[a:]:
                val = float(self._r[i, j, k, l])
                if val:
                    out.append((i + 1, j + 1, k + 1, l + 1, val))
        return out

    def __repr__(self) -> str:
        return f"RiemannTensor(n={self._n}, nonzero={len(self.independent_components())})"


def riemann_violations(r: np.ndarray) -> Dict[str, float]:
    """Max violation of each algebraic curvature identity."""
    anti1 = np.max(np.abs(r + r.transpose(1, 0, 2, 3)), initial=0.0)
    anti2 = np.max(np.abs(r + r.transpose(0, 1, 3, 2)), initial=0.0)
    pair = np.max(np.abs(r - r.transpose(2, 3, 0, 1)), initial=0.0)
    # R_ijkl + R_iklj + R_iljk
    bianchi = np.max(np.abs(r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2)), initial=0.0)
    return {"antisymmetry": float(max(anti1, anti2)), "pair symmetry": float(pair), "first Bianchi": float(bianchi)}


def kulkarni_nomizu(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(h ∧○ g)_{ijkl} = h_ik g_jl + h_jl g_ik - h_il g_jk - h_jk g_il."""
    return (
        np.einsum("ik,jl->ijkl", h, g)
        + np.einsum("jl,ik->ijkl", h, g)
        - np.einsum("il,jk->ijkl", h, g)
        - np.einsum("jk,il->ijkl", h, g)
    )


def random_riemann(n: int, rng: np.random.Generator, terms: int = 3, scale: float = 0.5) -> RiemannTensor:
    """Σ ±½ (h ∧○ h) over random symmetric h; satisfies every curvature identity."""
    n = check_dimension(n)
    r = np.zeros((n,) * 4)
    for _ in range(terms):
        h = rng.normal(size=(n, n)) * scale
        h = (h + h.T) / 2
        r += rng.choice([-1.0, 1.0]) * 0.5 * kulkarni_nomizu(h, h)
    return RiemannTensor(r)


def sphere_riemann(n: int, kappa: float = 1.0) -> RiemannTensor:
    """R_ijkl = κ(δ_ik δ_jl - δ_il δ_jk)."""
    n = check_dimension(n)
    g = np.eye(n)
    return RiemannTensor(0.5 * kappa * kulkarni_nomizu(g, g))


def riemann_from_components(n: int, components: Mapping[Tuple[int, int, int, int], float]) -> RiemannTensor:
    """Fill the symmetry orbit of each listed component (1-based); conflicts are not checked here."""
    n = check_dimension(n)
    r = np.zeros((n,) * 4)
    for (i, j, k, l), val in components.items():
        for (a, b, c, d), s in symmetry_orbit(i - 1, j - 1, k - 1, l - 1):
            r[a, b, c, d] = s * val
    return RiemannTensor(r)


def symmetry_orbit(i: int, j: int, k: int, l: int) -> List[Tuple[Tuple[int, int, int, int], float]]:
    base = [((i, j, k, l), 1.0), ((j, i, k, l), -1.0), ((i, j, l, k), -1.0), ((j, i, l, k), 1.0)]
    return base + [((c, d, a, b), s) for (a, b, c, d), s in base]


FIXTURE_TENSORS = {
    "flat4": lambda: RiemannTensor.zeros(4),
    "single_blade4": lambda: riemann_from_components(4, {(1, 2, 1, 2): 1.0}),
    "s2xs2": lambda: riemann_from_components(4, {(1, 2, 1, 2): 1.0, (3, 4, 3, 4): 1.0}),
    "sphere4": lambda: sphere_riemann(4, 1.0),
    "cp2": lambda: riemann_from_components(4, {
        (1, 2, 1, 2): 4.0, (3, 4, 3, 4): 4.0,
        (1, 3, 1, 3): 1.0, (1, 4, 1, 4): 1.0, (2, 3, 2, 3): 1.0, (2, 4, 2, 4): 1.0,
        (1, 2, 3, 4): 2.0, (1, 3, 2, 4): 1.0, (1, 4, 2, 3): -1.0,
    }),
}


class CurvatureMap:
    """Ω(e_k, e_l) ∈ spin(n), stored as data[k, l, p] over the pair basis p = (i<j)."""

    __slots__ = ("_n", "_data")

    def __init__(self, dimension: int, data: np.ndarray):
        n = check_dimension(dimension)
        arr = np.array(data, dtype=float)
        P = len(spin_pairs(n))
        if arr.shape != (n, n, P):
            raise DimensionError(f"curvature map data must have shape {(n, n, P)}, got {arr.shape}")
        if np.max(np.abs(arr + arr.transpose(1, 0, 2)), initial=0.0) > RIEMANN_TOL:
            raise DomainError("curvature map must satisfy Ω(v, w) = -Ω(w, v)")
        arr.setflags(write=False)
        self._n = n
        self._data = arr

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def data(self) -> np.ndarray:
        return self._data

    def __call__(self, v, w) -> SpinElement:
        v = np.asarray(getattr(v, "components", v), dtype=float)
        w = np.asarray(getattr(w, "components", w), dtype=float)
        return SpinElement(self._n, np.einsum("k,klp,l->p", v, self._data, w))

    def scaled(self, c: float) -> "CurvatureMap":
        return CurvatureMap(self._n, self._data * c)

    def __add__(self, other: "CurvatureMap") -> "CurvatureMap":
        return CurvatureMap(self._n, self._data + other._data)

    def to_dict(self) -> Dict:
        return {"dimension": self._n, "data": self._data.tolist()}

    @classmethod
    def from_dict(cls, d: Dict) -> "CurvatureMap":
        return cls(int(d["dimension"]), np.array(d["data"], dtype=float))


def omega_from_riemann(R: RiemannTensor) -> CurvatureMap:
    n = R.dimension
    idx = np.array(spin_pairs(n)) - 1
    data = C_OMEGA * R.components[:, :, idx[:, 0], idx[:, 1]]
    return CurvatureMap(n, data)


def tau_a_omega(A: SpinElement, omega: CurvatureMap) -> AntisymMatrix:
    """M with ⟨M v, w⟩ = 2⟨A, Ω(v, w)⟩, i.e. M[l, k] = 2 Σ_p a_p Ω_{kl}^p."""
    if A.dimension != omega.dimension:
        raise DimensionError(f"dimension mismatch: {A.dimension} vs {omega.dimension}")
    return AntisymMatrix(2.0 * np.einsum("p,klp->lk", A.coords, omega.data))


def _numeric(prim: str, M: np.ndarray, n: int) -> np.ndarray:
    return analytic_apply(prim, FormMatrix.from_body(n, M)).body


@dataclass(frozen=True, eq=False)
class ExpDifferential:
    """Block-diagonal differential of (A, h) -> p·exp(A) exp(h) at (A, 0)."""

    vertical: np.ndarray
    horizontal: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        d, n = self.vertical.shape[0], self.horizontal.shape[0]
        out = np.zeros((d + n, d + n))
        out[:d, :d] = self.vertical
        out[d:, d:] = self.horizontal
        return out

    def det(self) -> float:
        return float(np.linalg.det(self.vertical) * np.linalg.det(self.horizontal))


def ad_block(A: SpinElement) -> np.ndarray:
    """(I - e^{-ad_A}) / ad_A on spin(n)."""
    return _numeric("expm1_ratio", ad_matrix(A), A.dimension)


def exp_differential(A: SpinElement, omega: CurvatureMap) -> ExpDifferential:
    """Blocks (I - e^{-ad_A})/ad_A and (I - e^{-τ/2})/(τ/2) with τ = τ(A·Ω)."""
    n = A.dimension
    vertical = ad_block(A)
    horizontal = _numeric("expm1_ratio", tau_a_omega(A, omega).matrix / 2.0, n)
    return ExpDifferential(vertical, horizontal)


def jacobian_factor(A: SpinElement) -> float:
    """J(A) = det((1 - e^{-ad_A}) / ad_A), the exponential-coordinates Jacobian on Spin(n)."""
    return float(np.linalg.det(ad_block(A)))


def phi0(A: SpinElement, omega: CurvatureMap) -> float:
    """det^{-1/2}(sinh(ad_A/2)/(ad_A/2)) · det^{-1/2}(sinh(τ/4)/(τ/4))."""
    n = A.dimension
    d_ad = np.linalg.det(_numeric("sinhc_half", ad_matrix(A), n))
    d_tau = np.linalg.det(_numeric("sinhc", tau_a_omega(A, omega).matrix / 4.0, n))
    if d_ad <= 0 or d_tau <= 0:
        raise DomainError(f"phi0: determinant factor non-positive ({d_ad:.3g}, {d_tau:.3g}); A outside the series regime")
    return float(d_ad ** -0.5 * d_tau ** -0.5)


def distance_quadratic_forms(v: Vector, A: SpinElement, omega: CurvatureMap) -> Tuple[float, float]:
    """(inverse-Jacobian form, coth form) of the u² coefficient of the squared distance."""
    n = A.dimension
    vv = np.asarray(getattr(v, "components", v), dtype=float)
    if vv.size != n:
        raise DimensionError(f"vector has {vv.size} components, expected {n}")
    T = tau_a_omega(A, omega).matrix
    jac = _numeric("expm1_ratio", T / 2.0, n)
    inverse_form = float(vv @ np.linalg.solve(jac, vv))
    coth_form = float(vv @ _numeric("xcoth", T / 4.0, n) @ vv)
    return inverse_form, coth_form


def distance_quadratic_form(v: Vector, A: SpinElement, omega: CurvatureMap, tol: float = IDENTITY_TOL) -> float:
    inverse_form, coth_form = distance_quadratic_forms(v, A, omega)
    err = abs(inverse_form - coth_form)
    if err > tol * max(1.0, abs(inverse_form)):
        raise IdentityMismatchError("coth reduction of the distance form", err, tol, (inverse_form, coth_form))
    return inverse_form


def riemann_form_matrix(R: RiemannTensor) -> FormMatrix:
    """(R_x)_{kl} = Σ_{i<j} R_{ijkl} e^i∧e^j."""
    n = R.dimension
    pos = even_position(n)
    data = np.zeros((n, n, len(pos)))
    for i, j in spin_pairs(n):
        data[:, :, pos[(1 << (i - 1)) | (1 << (j - 1))]] = R.components[i - 1, j - 1]
    return FormMatrix(n, data)


def ahat_of_matrix(Rx: FormMatrix) -> EvenForm:
    """det^{1/2}((R/2) / sinh(R/2)) over the even-form ring."""
    sinhc_half = analytic_apply("sinhc_half", Rx)
    return det_sqrt(sinhc_half.inverse())


def coth_quadratic(Rx: FormMatrix, v) -> EvenForm:
    """⟨v, (R/2) coth(R/2) v⟩."""
    return analytic_apply("xcoth", Rx * 0.5).quadratic(v)


# ---------- composites ----------

def phi0_composite(omega: CurvatureMap) -> Expr:
    tau_quarter = MatScale(TauOmega(omega), 0.25)
    return DetPower(MatrixApply("sinhc_half", AdMatrix()), -0.5) * DetPower(MatrixApply("sinhc", tau_quarter), -0.5)


def jacobian_composite() -> Expr:
    return DetPower(MatrixApply("expm1_ratio", AdMatrix()), 1.0)


def quadratic_composite(omega: CurvatureMap) -> Expr:
    """⟨v, ((I - e^{-τ/2})/(τ/2))^{-1} v⟩."""
    return Quadratic(MatInverse(MatrixApply("expm1_ratio", MatScale(TauOmega(omega), 0.5))))


def coth_composite(omega: CurvatureMap) -> Expr:
    """⟨v, (τ/4) coth(τ/4) v⟩."""
    return Quadratic(MatrixApply("xcoth", MatScale(TauOmega(omega), 0.25)))


theorem1_composite = phi0_composite
theorem2_composite = quadratic_composite


def _assert_forms_equal(name: str, left: EvenForm, right: EvenForm, tol: float) -> None:
    err = float(np.max(np.abs(left.data - right.data)))
    if err > tol:
        raise IdentityMismatchError(name, err, tol, {"grassmann": left.coefficients, "direct": right.coefficients})


def theorem1_sides(R: RiemannTensor) -> Tuple[EvenForm, EvenForm]:
    """(Φ(2e∧e*), det^{1/2}((R/2)/sinh(R/2)))."""
    n = R.dimension
    left = grassmann_eval(theorem1_composite(omega_from_riemann(R)), SpinElement(n), 2.0)
    return left, ahat_of_matrix(riemann_form_matrix(R))


def theorem2_sides(v: Vector, R: RiemannTensor) -> Tuple[EvenForm, EvenForm]:
    """(Ψ(2e∧e*), ⟨v, (R/2)coth(R/2) v⟩)."""
    n = R.dimension
    left = grassmann_eval(theorem2_composite(omega_from_riemann(R)), SpinElement(n), 2.0, v=v)
    return left, coth_quadratic(riemann_form_matrix(R), v)


def theorem1_eval(R: RiemannTensor, tol: float = IDENTITY_TOL) -> EvenForm:
    left, right = theorem1_sides(R)
    _assert_forms_equal("Φ(2e∧e*) vs det^{1/2}((R/2)/sinh(R/2))", left, right, tol)
    return left


def theorem2_eval(v: Vector, R: RiemannTensor, tol: float = IDENTITY_TOL) -> EvenForm:
    left, right = theorem2_sides(v, R)
    _assert_forms_equal("Ψ(2e∧e*) vs ⟨v, (R/2)coth(R/2) v⟩", left, right, tol)
    return left
