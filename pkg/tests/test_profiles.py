# tests/test_profiles.py
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import pytest

import src.profiles as profiles
from src.errors import DomainError
from src.profiles import load_profile, merge_overrides


class TestLoadProfile(unittest.TestCase):
    def setUp(self):
        self.env = patch.dict(os.environ, {}, clear=False)
        self.env.start()
        os.environ.pop("GETZLER_PROFILE", None)

    def tearDown(self):
        self.env.stop()

    def test_default_profile(self):
        p = load_profile()
        self.assertEqual(p.name, "default")
        self.assertEqual(p.gauss_hermite_order, {2: 30, 4: 7})
        self.assertEqual(p.t_grid, [0.2, 0.1, 0.05, 0.02])

    def test_quick_profile(self):
        p = load_profile("quick")
        self.assertEqual(p.gauss_hermite_order, {2: 20, 4: 5})
        self.assertEqual(len(p.t_grid), 3)
        self.assertEqual(p.samples["supertrace"], 5)

    def test_thorough_profile_is_finer(self):
        p = load_profile("Thorough ")
        self.assertEqual(p.name, "thorough")
        self.assertEqual(min(p.t_grid), 0.01)
        self.assertGreater(p.gauss_hermite_order[2], load_profile("default").gauss_hermite_order[2])

    def test_env_selects_profile(self):
        os.environ["GETZLER_PROFILE"] = "quick"
        self.assertEqual(load_profile().name, "quick")
        # explicit argument wins over the environment
        self.assertEqual(load_profile("default").name, "default")

    def test_unknown_profile(self):
        with self.assertRaises(FileNotFoundError):
            load_profile("nonexistent")


class TestProfileDirectory(unittest.TestCase):
    def setUp(self):
        self.tmpdir = Path(tempfile.mkdtemp(prefix="test_profiles_"))
        self.patcher = patch.object(profiles, "profiles_directory", self.tmpdir)
        self.patcher.start()

    def tearDown(self):
        self.patcher.stop()
        shutil.rmtree(self.tmpdir, ignore_errors=True)

    def test_custom_profile_fills_defaults(self):
        (self.tmpdir / "tiny.yaml").write_text("t_grid: [0.05, 0.1]\n")
        p = load_profile("tiny")
        self.assertEqual(p.name, "tiny")
        self.assertEqual(p.t_grid, [0.1, 0.05])
        self.assertEqual(p.tolerances.identity, 1e-10)

    def test_invalid_profile(self):
        (self.tmpdir / "broken.yaml").write_text("t_grid: [0.1]\n")
        with self.assertRaises(DomainError):
            load_profile("broken")

    def test_unknown_field(self):
        (self.tmpdir / "extra.yaml").write_text("colour: blue\n")
        with self.assertRaises(DomainError):
            load_profile("extra")

    def test_malformed_yaml(self):
        (self.tmpdir / "garbled.yaml").write_text("t_grid: [0.1, 0.05\nu_grid: {\n")
        with self.assertRaises(DomainError):
            load_profile("garbled")

    def test_top_level_list(self):
        (self.tmpdir / "listed.yaml").write_text("- 0.1\n- 0.05\n")
        with self.assertRaises(DomainError):
            load_profile("listed")


def test_merge_overrides_updates_one_tolerance():
    base = load_profile("quick")
    merged = merge_overrides(base, {"tolerances": {"theorem3": 1e-2}})
    assert merged.tolerances.theorem3 == 1e-2
    assert merged.tolerances.oracle1d == base.tolerances.oracle1d
    assert base.tolerances.theorem3 == 1e-3


@pytest.mark.parametrize("overrides", [[1], "u_grid", 5])
def test_merge_overrides_rejects_non_mapping(overrides):
    with pytest.raises(DomainError):
        merge_overrides(load_profile("quick"), overrides)


def test_merge_overrides_replaces_grids_sorted():
    merged = merge_overrides(load_profile("quick"), {"u_grid": [0.1, 0.3, 0.2]})
    assert merged.u_grid == [0.3, 0.2, 0.1]


def test_merge_overrides_empty_is_identity():
    base = load_profile("quick")
    assert merge_overrides(base, None) is base
    assert merge_overrides(base, {}) is base


@pytest.mark.parametrize("overrides", [
    {"no_such_section": 1},
    {"tolerances": {"theorem3": -1.0}},
    {"t_grid": [0.1]},
])
def test_merge_overrides_rejects(overrides):
    with pytest.raises(DomainError):
        merge_overrides(load_profile("quick"), overrides)
