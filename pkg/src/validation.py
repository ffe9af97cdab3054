"""Input checks shared by the CLI and the verification suites.

Dimension
  even, 2 ≤ n ≤ 8; suites narrow this further (integration only for n ∈ {2,4})

Vectors
  "x1,x2,...,xn" comma-separated reals, length must equal n

Grids
  t and u grids: at least two distinct positive values, returned descending

Suites
  supertrace, hoperator, theorem1, theorem2, theorem3, localization, oracle1d, all
"""
# src/validation.py

from typing import Dict, Iterable, List, Tuple

import numpy as np

from .errors import DimensionError, DomainError
from .exterior import Vector, check_dimension

SUITES = ("supertrace", "hoperator", "theorem1", "theorem2", "theorem3", "localization", "oracle1d")

# dimensions each suite can run in
SUITE_DIMENSIONS: Dict[str, Tuple[int, ...]] = {
    "supertrace": (2, 4, 6),
    "hoperator": (2, 4, 6),
    "theorem1": (2, 4, 6),
    "theorem2": (2, 4, 6),
    "theorem3": (2, 4),
    "localization": (2, 4),
    "oracle1d": (2, 4, 6),
}


def validate_dimension(n) -> int:
    try:
        n = int(n)
    except (TypeError, ValueError):
        raise DimensionError(f"dimension must be an integer, got {n!r}")
    return check_dimension(n)


def validate_vector(text: str, n: int) -> Vector:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    try:
        comps = [float(p) for p in parts]
    except ValueError:
        raise DomainError(f"invalid vector {text!r}: expected comma-separated reals")
    if len(comps) != n:
        raise DimensionError(f"vector {text!r} has {len(comps)} components, expected {n}")
    if not np.all(np.isfinite(comps)):
        raise DomainError(f"vector {text!r} has non-finite components")
    return Vector(comps)


def validate_time(t) -> float:
    t = float(t)
    if not np.isfinite(t) or t <= 0:
        raise DomainError(f"t must be a positive real, got {t}")
    return t


def validate_grid(values: Iterable[float], label: str = "grid") -> List[float]:
    out = sorted({float(x) for x in values}, reverse=True)
    if len(out) < 2:
        raise DomainError(f"{label} needs at least two distinct values")
    if out[-1] <= 0:
        raise DomainError(f"{label} values must be positive")
    return out


def validate_suite(name: str) -> List[str]:
    key = name.strip().lower()
    if key == "all":
        return list(SUITES)
    if key not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return [key]


def feasible_suites(suites: Iterable[str], n: int) -> List[str]:
    return [s for s in suites if n in SUITE_DIMENSIONS[s]]
