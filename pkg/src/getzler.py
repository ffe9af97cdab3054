# src/getzler.py
"""
Getzler rescaling on polynomial kernel germs, symbol extraction, the Mehler
kernel and the Â-form.

A KernelExpansion is a finite sum of terms

    coefficient(Multivector) · v^α · t^p · u^q

optionally multiplied by one Gaussian prefactor
(4π t_s t)^{-n/2} exp(-v_s²|v|² / (4 t_s t)), where v_s and t_s record how v and
t have been dilated by earlier rescalings.

Weights: under Getzler rescaling a term with blade degree j and v-degree |α|
picks up u^{|α| - j}; the parabolic variant adds u^{2p} for t^p and u^{-n}
from the prefactor. Order detection is pure exponent bookkeeping.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .composite import Apply, Const, Expr, evaluate_pointwise
from .convergence import convergence_table, extrapolate_to_zero, fit_order, require_convergent, richardson
from .errors import DimensionError, DomainError, IdentityMismatchError, UnboundedOrderError
from .exterior import Multivector, Vector, berezin, blade_grades, check_dimension, grade_project, wedge
from .geometry import (
    RiemannTensor,
    ahat_of_matrix,
    coth_quadratic,
    jacobian_composite,
    omega_from_riemann,
    phi0_composite,
    quadratic_composite,
    riemann_form_matrix,
)
from .nilpotent import EvenForm, FormMatrix, analytic_apply
from .spinors import supertrace_constant

logger = logging.getLogger(__name__)

TermKey = Tuple[Tuple[int, ...], Fraction, int]


@dataclass(frozen=True)
class GaussianPrefactor:
    v_scale: float = 1.0
    t_scale: float = 1.0
    exponential: bool = True

    def value(self, n: int, v: np.ndarray, t: float) -> float:
        ts = self.t_scale * t
        out = (4.0 * math.pi * ts) ** (-n / 2)
        if self.exponential:
            out *= math.exp(-(self.v_scale ** 2) * float(v @ v) / (4.0 * ts))
        return out


class KernelExpansion:
    """Polynomial-in-(v, t, u) kernel germ with Multivector coefficients."""

    __slots__ = ("_n", "_terms", "_prefactor")

    def __init__(self, dimension: int, terms: Mapping[TermKey, Multivector], prefactor: Optional[GaussianPrefactor] = None):
        n = check_dimension(dimension)
        clean: Dict[TermKey, Multivector] = {}
        for (alpha, p, q), coeff in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or min(alpha, default=0) < 0:
                raise DimensionError(f"multi-index {alpha} must have {n} non-negative entries")
            if coeff.dimension != n:
                raise DimensionError(f"coefficient dimension {coeff.dimension} != {n}")
            key = (alpha, Fraction(p), int(q))
            acc = clean.get(key)
            clean[key] = coeff if acc is None else acc + coeff
        self._n = n
        self._terms = {k: c for k, c in clean.items() if np.any(c.data)}
        self._prefactor = prefactor

    @classmethod
    def constant(cls, coeff: Multivector, prefactor: Optional[GaussianPrefactor] = None) -> "KernelExpansion":
        n = coeff.dimension
        return cls(n, {((0,) * n, Fraction(0), 0): coeff}, prefactor)

    @classmethod
    def monomial(cls, coeff: Multivector, alpha: Sequence[int], p: float | Fraction = 0, q: int = 0) -> "KernelExpansion":
        return cls(coeff.dimension, {(tuple(alpha), Fraction(p), q): coeff})

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def terms(self) -> Dict[TermKey, Multivector]:
        return dict(self._terms)

    @property
    def prefactor(self) -> Optional[GaussianPrefactor]:
        return self._prefactor

    def is_empty(self) -> bool:
        return not self._terms

    def with_prefactor(self, prefactor: Optional[GaussianPrefactor]) -> "KernelExpansion":
        return KernelExpansion(self._n, self._terms, prefactor)

    def __add__(self, other: "KernelExpansion") -> "KernelExpansion":
        if other.dimension != self._n:
            raise DimensionError("dimension mismatch")
        if self._prefactor != other._prefactor:
            raise DomainError("cannot add kernels with different Gaussian prefactors")
        merged = dict(self._terms)
        for k, c in other._terms.items():
            merged[k] = merged[k] + c if k in merged else c
        return KernelExpansion(self._n, merged, self._prefactor)

    def __mul__(self, other):
        if np.isscalar(other):
            return KernelExpansion(self._n, {k: c * other for k, c in self._terms.items()}, self._prefactor)
        if not isinstance(other, KernelExpansion):
            return NotImplemented
        if self._prefactor is not None and other._prefactor is not None:
            raise DomainError("product of two Gaussian-prefactored kernels is not representable")
        out: Dict[TermKey, Multivector] = {}
        for (a1, p1, q1), c1 in self._terms.items():
            for (a2, p2, q2), c2 in other._terms.items():
                key = (tuple(x + y for x, y in zip(a1, a2)), p1 + p2, q1 + q2)
                prod = wedge(c1, c2)
                out[key] = out[key] + prod if key in out else prod
        return KernelExpansion(self._n, out, self._prefactor or other._prefactor)

    __rmul__ = __mul__

    def evaluate(self, v=None, t: float = 1.0, u: float = 1.0) -> Multivector:
        n = self._n
        vv = np.zeros(n) if v is None else np.asarray(getattr(v, "components", v), dtype=float)
        if vv.size != n:
            raise DimensionError(f"vector has {vv.size} components, expected {n}")
        out = Multivector(n)
        for (alpha, p, q), c in self._terms.items():
            mono = float(np.prod(vv ** np.array(alpha))) * t ** float(p) * u ** q
            if mono:
                out = out + c * mono
        if self._prefactor is not None:
            out = out * self._prefactor.value(n, vv, t)
        return out

    def assemble(self) -> Multivector:
        """Value at v = 0, t = 1, u = 1."""
        return self.evaluate(None, 1.0, 1.0)

    def graded_terms(self) -> List[Tuple[TermKey, int, Multivector]]:
        """Split every coefficient into homogeneous pieces: (key, blade degree, piece)."""
        out = []
        for key, c in self._terms.items():
            for j in c.grades():
                out.append((key, j, grade_project(c, j)))
        return out

    def __repr__(self) -> str:
        return f"KernelExpansion(n={self._n}, terms={len(self._terms)}, prefactor={self._prefactor})"


def _check_u(u: float) -> None:
    if u == 0:
        raise DomainError("rescaling parameter u must be nonzero")


def getzler_rescale(kappa: KernelExpansion, u: float) -> KernelExpansion:
    """δ_u: degree-j components times u^{-j}, v-monomials of degree d times u^d."""
    _check_u(u)
    out: Dict[TermKey, Multivector] = {}
    for (alpha, p, q), j, piece in kappa.graded_terms():
        key = (alpha, p, q)
        scaled = piece * float(u) ** (sum(alpha) - j)
        out[key] = out[key] + scaled if key in out else scaled
    pre = kappa.prefactor
    if pre is not None:
        pre = replace(pre, v_scale=pre.v_scale * u)
    return KernelExpansion(kappa.dimension, out, pre)


def parabolic_rescale(kappa: KernelExpansion, u: float) -> KernelExpansion:
    """Getzler rescaling together with t -> u² t."""
    _check_u(u)
    out: Dict[TermKey, Multivector] = {}
    for (alpha, p, q), j, piece in kappa.graded_terms():
        key = (alpha, p, q)
        scaled = piece * (float(u) ** (sum(alpha) - j) * float(u) ** (2 * float(p)))
        out[key] = out[key] + scaled if key in out else scaled
    pre = kappa.prefactor
    if pre is not None:
        pre = replace(pre, v_scale=pre.v_scale * u, t_scale=pre.t_scale * u * u)
    return KernelExpansion(kappa.dimension, out, pre)


def term_weight(key: TermKey, degree: int, parabolic: bool) -> Fraction:
    alpha, p, q = key
    w = Fraction(q + sum(alpha) - degree)
    if parabolic:
        w += 2 * p
    return w


def getzler_order_and_symbol(kappa: KernelExpansion, parabolic: bool = False) -> Tuple[int, KernelExpansion]:
    """(m, σ^G) with m the least integer making every exponent of u^m δ_u κ non-negative."""
    pieces = kappa.graded_terms()
    if not pieces:
        raise UnboundedOrderError("Getzler order of an empty kernel is undefined")
    n = kappa.dimension
    pre = kappa.prefactor
    pre_weight = Fraction(-n) if (parabolic and pre is not None) else Fraction(0)
    weights = [term_weight(key, j, parabolic) + pre_weight for key, j, _ in pieces]
    m = math.ceil(-min(weights))
    symbol: Dict[TermKey, Multivector] = {}
    for (key, j, piece), w in zip(pieces, weights):
        if w + m == 0:
            k = (key[0], key[1], 0)
            symbol[k] = symbol[k] + piece if k in symbol else piece
    sym_pre = None
    if pre is not None:
        # parabolic: exp(-|uv|²/4u²t) is u-invariant; geometric: it tends to 1
        sym_pre = GaussianPrefactor(1.0, 1.0, exponential=parabolic and pre.exponential)
    logger.debug("Getzler order %d (parabolic=%s) from %d graded terms", m, parabolic, len(pieces))
    return m, KernelExpansion(n, symbol, sym_pre)


def supertrace_from_symbol(kappa: KernelExpansion, parabolic: bool = False) -> complex:
    """0 if m < n, (2/i)^{n/2} B(σ^G(κ)(0)) if m = n."""
    n = kappa.dimension
    m, symbol = getzler_order_and_symbol(kappa, parabolic)
    if m > n:
        raise UnboundedOrderError(f"Getzler order {m} exceeds the dimension {n}")
    if m < n:
        return 0j
    return supertrace_constant(n) * berezin(symbol.evaluate(None, 1.0, 1.0))


# ---------- Â and Mehler ----------

def ahat_form(R: RiemannTensor) -> EvenForm:
    return ahat_of_matrix(riemann_form_matrix(R))


def mehler_kernel(R: RiemannTensor, v, t: float) -> EvenForm:
    """(4πt)^{-n/2} det^{1/2}((tR/2)/sinh(tR/2)) exp(-(1/4t)⟨v, (tR/2)coth(tR/2) v⟩)."""
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    n = R.dimension
    Rt = riemann_form_matrix(R) * t
    exponent = coth_quadratic(Rt, v) * (-1.0 / (4.0 * t))
    return ahat_of_matrix(Rt) * exponent.exp() * (4.0 * math.pi * t) ** (-n / 2)


def index_density(R: RiemannTensor, tol: float = 1e-12) -> float:
    n = R.dimension
    value = supertrace_constant(n) * (4.0 * math.pi) ** (-n / 2) * ahat_form(R).top()
    if abs(value.imag) > tol:
        raise IdentityMismatchError("index density imaginary residue", abs(value.imag), tol, value)
    return float(value.real)


def mehler_expansion(R: RiemannTensor) -> KernelExpansion:
    """Model heat-kernel germ (4πt)^{-n/2} e^{-|v|²/4t} Â(tR) exp(-(1/4t)⟨v, ((tR/2)coth(tR/2) - I) v⟩).

    Every term has parabolic weight -n, so the parabolic Getzler order is n.
    """
    n = R.dimension
    Rx = riemann_form_matrix(R)
    zero = (0,) * n
    ahat = ahat_of_matrix(Rx).to_multivector()
    ahat_part = KernelExpansion(n, {(zero, Fraction(j // 2), 0): grade_project(ahat, j) for j in range(0, n + 1, 2)})

    C = analytic_apply("xcoth", Rx * 0.5) - FormMatrix.identity(n, n)
    corr: Dict[TermKey, Multivector] = {}
    for k in range(n):
        for l in range(n):
            entry = C.entry(k, l).to_multivector()
            if not np.any(entry.data):
                continue
            alpha = [0] * n
            alpha[k] += 1
            alpha[l] += 1
            for j in entry.grades():
                # degree-j part of C(tR) carries t^{j/2}; the 1/(4t) lowers it by one
                key = (tuple(alpha), Fraction(j, 2) - 1, 0)
                piece = grade_project(entry, j) * -0.25
                corr[key] = corr[key] + piece if key in corr else piece
    X = KernelExpansion(n, corr)

    exp_x = KernelExpansion.constant(Multivector.scalar(n, 1.0))
    term = exp_x
    for k in range(1, n // 2 + 1):
        term = term * X * (1.0 / k)
        if term.is_empty():
            break
        exp_x = exp_x + term
    return (ahat_part * exp_x).with_prefactor(GaussianPrefactor())


# ---------- Theorem 3 convergence study ----------

@dataclass
class Theorem3Report:
    n: int
    table: pd.DataFrame
    fitted_order: float
    divergent_order: float
    extrapolated_error: float
    richardson_error: float
    tolerance: float
    exact: bool
    passed: bool
    target: Dict[str, float] = field(default_factory=dict)


def theorem3_integrands(R: RiemannTensor) -> Tuple[Expr, Expr]:
    """(Ψ, flat normalizer): Ψ = exp(-¼⟨v, Q(A) v⟩) Φ₀(A) J(A), normalizer Φ₀|_{Ω=0} J."""
    omega = omega_from_riemann(R)
    flat = omega_from_riemann(RiemannTensor.zeros(R.dimension))
    psi = Apply("exp", Const(-0.25) * quadratic_composite(omega)) * phi0_composite(omega) * jacobian_composite()
    norm = phi0_composite(flat) * jacobian_composite()
    return psi, norm


def rescaled_model_value(R: RiemannTensor, v, u: float, spec) -> Multivector:
    """u^n Σ_j u^{-j} σ_j of the assembled model kernel at time u², normalized by the flat fiber mass."""
    from .quadrature import gauss_grassmann_integral

    n = R.dimension
    s = u * u
    psi, norm = theorem3_integrands(R)
    G = gauss_grassmann_integral(psi, s, spec, n=n, v=v)
    N0 = gauss_grassmann_integral(norm, s, spec, n=n).scalar_part().real
    return G * ((4.0 * math.pi) ** (-n / 2) / N0)


def theorem3_check(
    R: RiemannTensor,
    v,
    u_grid: Sequence[float],
    spec,
    tol: float = 1e-4,
    order_min: float = 1.0,
    exact_tol: float = 1e-10,
) -> Theorem3Report:
    n = R.dimension
    us = np.array(sorted(u_grid, reverse=True), dtype=float)
    if us.size < 2 or np.any(us <= 0):
        raise DomainError("u-grid needs at least two positive values")
    target = mehler_kernel(R, v, 1.0).to_multivector()
    values = [rescaled_model_value(R, v, float(u), spec) for u in us]
    errors = np.array([float(np.max(np.abs(x.data - target.data))) for x in values])
    sub = np.array([x.norm() / u for x, u in zip(values, us)])

    exact = bool(np.all(errors < exact_tol))
    order = float("inf") if exact else require_convergent(us, errors, "rescaled model kernel")
    divergent = fit_order(us, sub)
    limit = extrapolate_to_zero(us ** 2, np.stack([x.data for x in values]))
    extrapolated_error = float(np.max(np.abs(limit - target.data)))
    rich = richardson(us[-2] ** 2, values[-2].data, us[-1] ** 2, values[-1].data, 1.0)
    richardson_error = float(np.max(np.abs(rich - target.data)))
    passed = exact or (order >= order_min and divergent <= 0.0 and extrapolated_error <= tol)

    table = convergence_table(us, errors, "u")
    table["u^(n-1) scaled norm"] = sub
    logger.info("theorem3 n=%d: order %.3f, divergent slope %.3f, extrapolated error %.2e", n, order, divergent, extrapolated_error)
    return Theorem3Report(
        n=n,
        table=table,
        fitted_order=order,
        divergent_order=divergent,
        extrapolated_error=extrapolated_error,
        richardson_error=richardson_error,
        tolerance=tol,
        exact=exact,
        passed=passed,
        target={"".join(map(str, k)) or "1": float(c.real) for k, c in target.coefficients.items()},
    )
