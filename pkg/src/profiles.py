# src/profiles.py

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from models.schemas import SuiteProfile

from .errors import DomainError

profiles_directory = Path("data/profiles")
PROFILE_FILES = {
    "default": "default.yaml",
    "quick": "quick.yaml",
    "thorough": "thorough.yaml",
}


def load_profile(profile_name: Optional[str] = None) -> SuiteProfile:
    name = (profile_name or os.getenv("GETZLER_PROFILE") or "default").strip().lower()
    fname = PROFILE_FILES.get(name, f"{name}.yaml")
    path = profiles_directory / fname
    if not path.exists():
        raise FileNotFoundError(f"Profile {name} not found at {path}")
    try:
        with path.open() as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as exc:
        raise DomainError(f"malformed profile {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"profile {path} must be a mapping, got {type(data).__name__}")
    data.setdefault("name", name)
    try:
        return SuiteProfile.model_validate(data)
    except ValidationError as exc:
        raise DomainError(f"invalid profile {path}: {exc}") from exc


def merge_overrides(profile: SuiteProfile, overrides: Optional[Dict[str, Any]] = None) -> SuiteProfile:
    """Shallow per-section merge: mapping sections are updated key by key, everything else replaced."""
    if not overrides:
        return profile
    if not isinstance(overrides, dict):
        raise DomainError(f"profile overrides must be a mapping, got {type(overrides).__name__}")
    data = profile.model_dump()
    for key, value in overrides.items():
        if key not in data:
            raise DomainError(f"unknown profile key {key!r}")
        if isinstance(data[key], dict) and isinstance(value, dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    try:
        return SuiteProfile.model_validate(data)
    except ValidationError as exc:
        raise DomainError(f"invalid profile overrides: {exc}") from exc
