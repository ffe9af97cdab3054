"""
Curvature ingestion.

Responsibilities

Resolve a curvature argument: a path, or a bare fixture name looked up in
GETZLER_FIXTURES (default data/fixtures)

Parse YAML, validate against CurvatureFile, complete symmetry orbits

Reject contradictions (two listed components forcing different values on the
same entry, nonzero entries with i = j or k = l) with the offending line

Reject tensors that fail the first Bianchi identity after completion

Return the tensor together with a sha256 digest of the canonical input
"""
# src/loader.py

from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple
import hashlib
import json
import logging
import os

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

from models.schemas import CurvatureFile

from .errors import DomainError, IngestionError
from .geometry import RiemannTensor, symmetry_orbit

logger = logging.getLogger(__name__)

FIXTURES_DIR = Path("data/fixtures")
CONFLICT_TOL = 1e-12


@dataclass
class LoadedCurvature:
    tensor: RiemannTensor
    document: CurvatureFile
    digest: str
    path: Path

    @property
    def label(self) -> str:
        return self.document.label or self.path.stem


def fixtures_dir() -> Path:
    env = os.getenv("GETZLER_FIXTURES")
    return Path(env) if env else FIXTURES_DIR


def resolve_curvature_path(arg: str) -> Path:
    p = Path(arg)
    if os.sep not in arg and "/" not in arg and not p.suffix:
        p = fixtures_dir() / f"{arg}.yaml"
    if not p.exists():
        raise IngestionError("curvature file not found", path=str(p))
    return p


def _component_lines(text: str) -> List[int]:
    """1-based line of every entry under `components`."""
    root = yaml.compose(text)
    if not isinstance(root, yaml.MappingNode):
        return []
    for key, value in root.value:
        if key.value == "components" and isinstance(value, yaml.SequenceNode):
            return [item.start_mark.line + 1 for item in value.value]
    return []


def canonical_digest(doc: CurvatureFile) -> str:
    payload = {
        "dimension": doc.dimension,
        "components": sorted((c.i, c.j, c.k, c.l, c.value) for c in doc.components),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def parse_curvature(text: str, path: str = "<string>") -> Tuple[CurvatureFile, List[int]]:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise IngestionError(f"invalid YAML: {getattr(exc, 'problem', exc)}", path, mark.line + 1 if mark else None)
    if not isinstance(raw, dict):
        raise IngestionError("expected a mapping with dimension and components", path, 1)
    lines = _component_lines(text)
    try:
        doc = CurvatureFile.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = err.get("loc", ())
        line = None
        if len(loc) >= 2 and loc[0] == "components" and isinstance(loc[1], int) and loc[1] < len(lines):
            line = lines[loc[1]]
        field = ".".join(str(x) for x in loc) or "document"
        raise IngestionError(f"{field}: {err.get('msg')}", path, line)
    return doc, lines


def complete_symmetries(doc: CurvatureFile, lines: List[int], path: str = "<string>") -> np.ndarray:
    n = doc.dimension
    r = np.zeros((n,) * 4)
    origin: Dict[Tuple[int, int, int, int], int] = {}
    for idx, rec in enumerate(doc.components):
        line = lines[idx] if idx < len(lines) else None
        i, j, k, l = rec.i - 1, rec.j - 1, rec.k - 1, rec.l - 1
        if (i == j or k == l) and rec.value != 0.0:
            raise IngestionError(
                f"R_{rec.i}{rec.j}{rec.k}{rec.l} = {rec.value} contradicts antisymmetry", path, line
            )
        for entry, sign in symmetry_orbit(i, j, k, l):
            val = sign * rec.value
            if entry in origin and abs(r[entry] - val) > CONFLICT_TOL:
                raise IngestionError(
                    f"R_{rec.i}{rec.j}{rec.k}{rec.l} = {rec.value} contradicts the value implied by line {origin[entry]}",
                    path,
                    line,
                )
            r[entry] = val
            origin.setdefault(entry, line)
    return r


def load_curvature_text(text: str, path: str = "<string>") -> Tuple[RiemannTensor, CurvatureFile]:
    doc, lines = parse_curvature(text, path)
    r = complete_symmetries(doc, lines, path)
    try:
        tensor = RiemannTensor(r)
    except DomainError as exc:
        raise IngestionError(str(exc), path) from exc
    logger.debug("loaded %d listed components from %s (n=%d)", len(doc.components), path, doc.dimension)
    return tensor, doc


def load_curvature(arg: str) -> LoadedCurvature:
    path = resolve_curvature_path(arg)
    tensor, doc = load_curvature_text(path.read_text(), str(path))
    return LoadedCurvature(tensor=tensor, document=doc, digest=canonical_digest(doc), path=path)


def list_fixtures(directory: Optional[Path] = None) -> pd.DataFrame:
    directory = directory or fixtures_dir()
    rows = []
    for p in sorted(directory.glob("*.yaml")):
        try:
            _, doc = load_curvature_text(p.read_text(), str(p))
            rows.append({"name": p.stem, "dimension": doc.dimension, "components": len(doc.components),
                         "label": doc.label or "", "status": "ok"})
        except IngestionError as exc:
            rows.append({"name": p.stem, "dimension": None, "components": None, "label": "", "status": str(exc)})
    return pd.DataFrame(rows, columns=["name", "dimension", "components", "label", "status"])
