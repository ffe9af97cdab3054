"""
build_report(...) -> Report, write_report(report, path), read_report(path)

Reports are YAML documents built from the pydantic Report model, dumped with
sort_keys=False so field order follows the model. Nothing time-dependent is
written unless wall_time was set (--timing), so repeated runs produce
byte-identical files.
"""
# src/storage.py

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional
import hashlib
import json
import math

import numpy as np
import pandas as pd
import yaml

from models.schemas import CheckResult, Report


def inputs_digest(payload: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON form of the command inputs."""
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()


def _plain(x: Any) -> Any:
    # numpy scalars and non-finite floats are not YAML-safe as-is
    if isinstance(x, np.ndarray):
        x = x.tolist()
    elif isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def frame_records(df: pd.DataFrame) -> List[Dict[str, Any]]:
    return [_plain(r) for r in df.to_dict(orient="records")]


def build_report(
    command: str,
    inputs: Dict[str, Any],
    checks: Iterable[CheckResult],
    tables: Optional[Dict[str, pd.DataFrame]] = None,
    seed: Optional[int] = None,
    n: Optional[int] = None,
    profile: Optional[str] = None,
    wall_time: Optional[float] = None,
) -> Report:
    return Report(
        command=command,
        inputs_digest=inputs_digest(inputs),
        seed=seed,
        n=n,
        profile=profile,
        checks=list(checks),
        tables={name: frame_records(df) for name, df in (tables or {}).items()},
        wall_time=wall_time,
    )


def report_to_yaml(report: Report) -> str:
    data = _plain(report.model_dump(exclude_none=True))
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)


def write_report(report: Report, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_to_yaml(report))
    return path


def read_report(path: Path) -> Report:
    with Path(path).open() as f:
        return Report.model_validate(yaml.safe_load(f))
