# models/schemas.py
"""
pydantic models for everything that crosses the file boundary:
curvature inputs, quadrature settings, suite profiles and reports.
"""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, field_validator, model_validator


class ComponentRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    i: PositiveInt
    j: PositiveInt
    k: PositiveInt
    l: PositiveInt
    value: float


class CurvatureFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int
    components: List[ComponentRecord] = Field(default_factory=list)
    label: Optional[str] = None
    source: Optional[str] = None

    @field_validator("dimension")
    @classmethod
    def _even_dimension(cls, n: int) -> int:
        if n < 2 or n > 8 or n % 2:
            raise ValueError(f"dimension must be even and between 2 and 8, got {n}")
        return n

    @model_validator(mode="after")
    def _indices_in_range(self) -> "CurvatureFile":
        for rec in self.components:
            if max(rec.i, rec.j, rec.k, rec.l) > self.dimension:
                raise ValueError(f"index out of range for dimension {self.dimension}: {rec.i}{rec.j}{rec.k}{rec.l}")
        return self


class QuadratureSpec(BaseModel):
    """Gaussian integration rule over spin(n) coordinates."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rule: Literal["gauss_hermite", "monte_carlo"] = "gauss_hermite"
    size: PositiveInt = 12  # Gauss–Hermite order per axis, or Monte Carlo sample count
    t: Optional[PositiveFloat] = None
    seed: int = 0
    exact_degree: Optional[int] = None  # polynomial degree for which exactness is claimed
    chunk: PositiveInt = 1 << 15

    @model_validator(mode="after")
    def _resolved_for_claim(self) -> "QuadratureSpec":
        if self.exact_degree is not None:
            if self.rule != "gauss_hermite":
                raise ValueError("exactness can only be claimed for the Gauss–Hermite rule")
            if self.size < self.exact_degree // 2 + 1:
                raise ValueError(
                    f"Gauss–Hermite order {self.size} under-resolves polynomial degree {self.exact_degree}"
                )
        return self


class Tolerances(BaseModel):
    identity: PositiveFloat = 1e-10
    supertrace: PositiveFloat = 1e-10
    localization_n2: PositiveFloat = 1e-6
    localization_n4: PositiveFloat = 1e-3
    theorem3: PositiveFloat = 1e-4
    oracle1d: PositiveFloat = 1e-10
    order_min: float = 1.0
    localization_order_min: float = 0.9
    hoperator: PositiveFloat = 1e-8
    exact: PositiveFloat = 1e-10


class SuiteProfile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "default"
    description: str = ""
    samples: Dict[str, PositiveInt] = Field(
        default_factory=lambda: {"supertrace": 20, "hoperator": 10, "theorem1": 10, "theorem2": 10}
    )
    tolerances: Tolerances = Field(default_factory=Tolerances)
    t_grid: List[PositiveFloat] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.02])
    u_grid: List[PositiveFloat] = Field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05])
    gauss_hermite_order: Dict[int, PositiveInt] = Field(default_factory=lambda: {2: 30, 4: 7})
    monte_carlo_samples: PositiveInt = 200_000
    exp_max_terms: PositiveInt = 400
    oracle1d_cases: List[Dict[str, float]] = Field(
        default_factory=lambda: [
            {"a": 1.0, "t": 0.5, "x": 0.3, "y": -0.2},
            {"a": 0.7, "t": 1.0, "x": 1.1, "y": 0.4},
        ]
    )

    @field_validator("t_grid", "u_grid")
    @classmethod
    def _at_least_two(cls, grid: List[float]) -> List[float]:
        if len(grid) < 2:
            raise ValueError("convergence grids need at least two points")
        return sorted(grid, reverse=True)


class CheckResult(BaseModel):
    suite: str
    name: str
    passed: bool
    max_error: Optional[float] = None
    tolerance: Optional[float] = None
    order: Optional[float] = None
    detail: Dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    command: str
    inputs_digest: str
    seed: Optional[int] = None
    n: Optional[int] = None
    profile: Optional[str] = None
    checks: List[CheckResult] = Field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict)
    wall_time: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)
