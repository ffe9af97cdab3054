# src/verify.py
"""
Verification suites behind `cli verify`.

Each suite is a pure function of (n, rng, profile) returning CheckResults and
optional tables. The rng of a suite is seeded from (seed, suite index), so a
run is deterministic in (seed, n, profile) whether suites run sequentially or
on a thread pool.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from models.schemas import CheckResult, QuadratureSpec, SuiteProfile

from .clifford import SpinElement, exp_clifford, sigma, spin_pairs
from .errors import GetzlerError, IdentityMismatchError
from .exterior import Multivector, Vector, berezin, exp_wedge
from .geometry import (
    coth_composite,
    omega_from_riemann,
    phi0_composite,
    random_riemann,
    theorem1_sides,
    theorem2_sides,
)
from .getzler import getzler_order_and_symbol, index_density, mehler_expansion, supertrace_from_symbol, theorem3_check
from .nilpotent import h_operator
from .oracles import ahat_series_oracle, free_heat_kernel, mehler_1d_closed, mehler_1d_oracle
from .quadrature import delta_t, localization_limit_check
from .spinors import check_clifford_relations, rho, supertrace, supertrace_constant
from .validation import SUITES, feasible_suites

logger = logging.getLogger(__name__)


@dataclass
class SuiteOutcome:
    suite: str
    checks: List[CheckResult] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _check(suite: str, name: str, errors: List[float], tol: float, worst: Optional[Dict] = None) -> CheckResult:
    max_error = float(max(errors)) if errors else 0.0
    passed = max_error <= tol
    detail = {"samples": len(errors)}
    if not passed and worst:
        detail["offending"] = worst
    return CheckResult(suite=suite, name=name, passed=passed, max_error=max_error, tolerance=tol, detail=detail)


def _random_spin(n: int, rng: np.random.Generator, radius: float = 0.5) -> SpinElement:
    x = rng.normal(size=len(spin_pairs(n)))
    x *= radius * rng.uniform() / max(np.linalg.norm(x), 1e-300)
    return SpinElement(n, x)


def _form_error(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a.data) - np.asarray(b.data))))


# ---------- suites ----------

def suite_supertrace(n: int, rng: np.random.Generator, profile: SuiteProfile) -> SuiteOutcome:
    tol = profile.tolerances.supertrace
    out = SuiteOutcome("supertrace")
    try:
        rel = check_clifford_relations(n)
        out.checks.append(CheckResult(suite="supertrace", name="clifford relations", passed=True, max_error=rel, tolerance=1e-12))
    except IdentityMismatchError as exc:
        out.checks.append(CheckResult(suite="supertrace", name="clifford relations", passed=False, detail={"error": str(exc)}))
    errors, worst, werr = [], None, -1.0
    c = supertrace_constant(n)
    for _ in range(profile.samples.get("supertrace", 20)):
        w = Multivector(n, rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n))
        lhs = supertrace(rho(w))
        rhs = c * berezin(sigma(w))
        err = abs(lhs - rhs)
        errors.append(err)
        if err > werr:
            werr, worst = err, {"str": str(lhs), "berezin side": str(rhs)}
    out.checks.append(_check("supertrace", "str ρ(ω) = (2/i)^{n/2} B(σ(ω))", errors, tol, worst))
    return out


def suite_hoperator(n: int, rng: np.random.Generator, profile: SuiteProfile) -> SuiteOutcome:
    tol = profile.tolerances.hoperator
    out = SuiteOutcome("hoperator")
    errors, dt_errors, worst = [], [], None
    for _ in range(profile.samples.get("hoperator", 50)):
        A = _random_spin(n, rng)
        lhs = sigma(exp_clifford(A, max_terms=profile.exp_max_terms))
        H = h_operator(A)
        a = A.to_multivector()
        err = _form_error(lhs, H(exp_wedge(a)))
        errors.append(err)
        if err > tol and worst is None:
            worst = {"A": A.coords.tolist(), "error": err}
        for t in (1.0, 0.5, 0.1):
            dt_errors.append(_form_error(delta_t(lhs, t), H(exp_wedge(a * (1.0 / t)))))
    out.checks.append(_check("hoperator", "σ(exp A) = ℋ(τ(A)) exp_∧ σ(A)", errors, tol, worst))
    out.checks.append(_check("hoperator", "δ_t σ(exp A) = ℋ(τ(A)) exp_∧(σ(A)/t)", dt_errors, tol))
    return out


def suite_theorem1(n: int, rng: np.random.Generator, profile: SuiteProfile) -> SuiteOutcome:
    tol = profile.tolerances.identity
    out = SuiteOutcome("theorem1")
    errors, oracle_errors, worst = [], [], None
    for _ in range(profile.samples.get("theorem1", 10)):
        R = random_riemann(n, rng)
        left, right = theorem1_sides(R)
        err = _form_error(left, right)
        errors.append(err)
        if err > tol and worst is None:
            worst = {"grassmann": {str(k): v for k, v in left.coefficients.items()},
                     "direct": {str(k): v for k, v in right.coefficients.items()}}
        oracle_errors.append(_form_error(right.to_multivector(), ahat_series_oracle(R)))
    out.checks.append(_check("theorem1", "Φ(2e∧e*) = det^{1/2}((R/2)/sinh(R/2))", errors, tol, worst))
    out.checks.append(_check("theorem1", "Â against the log(x/sinh x) series", oracle_errors, tol))
    return out


def suite_theorem2(n: int, rng: np.random.Generator, profile: SuiteProfile) -> SuiteOutcome:
    tol = profile.tolerances.identity
    out = SuiteOutcome("theorem2")
    errors, worst = [], None
    for _ in range(profile.samples.get("theorem2", 10)):
        R = random_riemann(n, rng)
        v = Vector(rng.normal(size=n))
        left, right = theorem2_sides(v, R)
        err = _form_error(left, right)
        errors.append(err)
        if err > tol and worst is None:
            worst = {"v": v.components.tolist(), "error": err}
    out.checks.append(_check("theorem2", "Ψ(2e∧e*) = ⟨v, (R/2)coth(R/2) v⟩", errors, tol, worst))
    return out


def _spec(n: int, profile: SuiteProfile) -> QuadratureSpec:
    return QuadratureSpec(rule="gauss_hermite", size=profile.gauss_hermite_order.get(n, 7))


def suite_theorem3(n: int, rng: np.random.Generator, profile: SuiteProfile) -> SuiteOutcome:
    tol = profile.tolerances
    out = SuiteOutcome("theorem3")
    R = random_riemann(n, rng, scale=0.3)
    v = Vector(rng.uniform(-0.5, 0.5, size=n))

    kappa = mehler_expansion(R)
    order, _ = getzler_order_and_symbol(kappa, parabolic=True)
    out.checks.append(CheckResult(suite="theorem3", name="parabolic Getzler order of the model kernel",
                                  passed=order == n, detail={"order": order, "n": n}))
    density = index_density(R)
    from_symbol = supertrace_from_symbol(kappa, parabolic=True)
    err = abs(from_symbol - density)
    out.checks.append(CheckResult(suite="theorem3", name="supertrace of the symbol = index density",
                                  passed=err <= tol.identity, max_error=err, tolerance=tol.identity,
                                  detail={"density": density}))

    report = theorem3_check(R, v, profile.u_grid, _spec(n, profile), tol=tol.theorem3,
                            order_min=tol.order_min, exact_tol=tol.exact)
    detail = {"divergent_order": report.divergent_order, "richardson_error": report.richardson_error,
              "exact": report.exact}
    if not report.passed:
        detail["target"] = report.target
        detail["errors"] = report.table["error"].tolist()
    out.checks.append(CheckResult(suite="theorem3", name="u^n δ_u k_{u²} → Mehler kernel",
                                  passed=report.passed, max_error=report.extrapolated_error,
                                  tolerance=report.tolerance, order=report.fitted_order, detail=detail))
    out.tables["theorem3"] = report.table
    return out


def suite_localization(n: int, rng: np.random.Generator, profile: SuiteProfile) -> SuiteOutcome:
    tol = profile.tolerances.localization_n2 if n == 2 else profile.tolerances.localization_n4
    out = SuiteOutcome("localization")
    R = random_riemann(n, rng, scale=0.3)
    omega = omega_from_riemann(R)
    v = Vector(rng.uniform(-0.5, 0.5, size=n))
    composites = {"Φ₀": (phi0_composite(omega), None), "coth form": (coth_composite(omega), v)}
    for label, (psi, vec) in composites.items():
        rep = localization_limit_check(psi, profile.t_grid, _spec(n, profile), n=n, v=vec, tol=tol,
                                       order_min=profile.tolerances.localization_order_min,
                                       exact_tol=profile.tolerances.exact)
        detail = {"richardson_error": rep.richardson_error, "exact": rep.exact}
        if not rep.passed:
            detail["errors"] = rep.table["error"].tolist()
        out.checks.append(CheckResult(suite="localization", name=f"I_t({label}) → {label}(2e∧e*)",
                                      passed=rep.passed, max_error=rep.limit_error, tolerance=tol,
                                      order=rep.fitted_order, detail=detail))
        out.tables[f"localization {label}"] = rep.table
    return out


def suite_oracle1d(n: int, rng: np.random.Generator, profile: SuiteProfile) -> SuiteOutcome:
    tol = profile.tolerances.oracle1d
    out = SuiteOutcome("oracle1d")
    cases = list(profile.oracle1d_cases)
    for _ in range(profile.samples.get("oracle1d", 20)):
        cases.append({"a": float(rng.uniform(0.3, 2.0)), "t": float(rng.uniform(0.2, 1.5)),
                      "x": float(rng.uniform(-1.5, 1.5)), "y": float(rng.uniform(-1.5, 1.5))})
    rows, errors = [], []
    for c in cases:
        closed, spectral = mehler_1d_oracle(c["a"], c["t"], c["x"], c["y"])
        rel = abs(closed - spectral) / max(abs(closed), 1e-300)
        errors.append(rel)
        rows.append({**c, "closed": closed, "spectral": spectral, "relative_error": rel})
    out.checks.append(_check("oracle1d", "Mehler closed form = Hermite eigenexpansion", errors, tol))

    # a -> 0: the oscillator kernel approaches the free heat kernel at rate a²
    a_vals = np.array([0.1, 0.05, 0.025])
    free_err = [abs(mehler_1d_closed(a, 0.5, 0.3, -0.2) - free_heat_kernel(0.5, 0.3, -0.2)) for a in a_vals]
    ratio = free_err[-1] / free_err[0]
    out.checks.append(CheckResult(suite="oracle1d", name="free limit a → 0", passed=ratio < 0.1,
                                  max_error=free_err[-1], detail={"error_ratio": ratio}))
    out.tables["oracle1d"] = pd.DataFrame(rows)
    return out


SUITE_FUNCTIONS: Dict[str, Callable[[int, np.random.Generator, SuiteProfile], SuiteOutcome]] = {
    "supertrace": suite_supertrace,
    "hoperator": suite_hoperator,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "theorem3": suite_theorem3,
    "localization": suite_localization,
    "oracle1d": suite_oracle1d,
}


def run_suite(name: str, n: int, seed: int, profile: SuiteProfile) -> SuiteOutcome:
    rng = np.random.default_rng([seed, SUITES.index(name)])
    logger.info("suite %s: n=%d seed=%d profile=%s", name, n, seed, profile.name)
    try:
        outcome = SUITE_FUNCTIONS[name](n, rng, profile)
    except GetzlerError as exc:
        detail = {"error": str(exc)}
        if isinstance(exc, IdentityMismatchError):
            detail["values"] = repr(exc.values)
        outcome = SuiteOutcome(name, [CheckResult(suite=name, name="suite raised", passed=False, detail=detail)])
    logger.info("suite %s finished: %s", name, "pass" if outcome.passed else "fail")
    return outcome


def run_suites(names: List[str], n: int, seed: int, profile: SuiteProfile, jobs: Optional[int] = None) -> List[SuiteOutcome]:
    names = feasible_suites(names, n)
    jobs = jobs or int(os.getenv("GETZLER_JOBS", "1"))
    if jobs <= 1 or len(names) <= 1:
        return [run_suite(s, n, seed, profile) for s in names]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda s: run_suite(s, n, seed, profile), names))
