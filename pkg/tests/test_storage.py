# tests/test_storage.py
import math
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from models.schemas import CheckResult, Report
from src.storage import _plain, build_report, inputs_digest, read_report, report_to_yaml, write_report


def _checks(passed=True):
    return [
        CheckResult(suite="theorem1", name="identity", passed=True, max_error=1e-15, tolerance=1e-10),
        CheckResult(suite="theorem3", name="limit", passed=passed, max_error=2e-5, tolerance=1e-4, order=1.02),
    ]


def test_inputs_digest_ignores_key_order():
    a = inputs_digest({"n": 4, "seed": 0, "suite": "all"})
    b = inputs_digest({"suite": "all", "seed": 0, "n": 4})
    assert a == b
    assert a != inputs_digest({"suite": "all", "seed": 1, "n": 4})


def test_plain_converts_numpy_and_special_values():
    out = _plain({1: np.float64(0.5), "arr": np.arange(3), "z": 1 + 2j, "inf": math.inf, "t": (np.int64(2),)})
    assert out == {"1": 0.5, "arr": [0, 1, 2], "z": {"re": 1.0, "im": 2.0}, "inf": "inf", "t": [2]}
    assert type(out["1"]) is float


def test_report_passed_requires_every_check():
    assert build_report("verify", {}, _checks()).passed
    assert not build_report("verify", {}, _checks(passed=False)).passed
    assert Report(command="fixtures", inputs_digest="x").passed


def test_report_yaml_is_deterministic():
    table = pd.DataFrame({"t": [0.2, 0.1], "error": [np.float64(1e-3), np.float64(5e-4)]})
    r1 = build_report("verify", {"seed": 3}, _checks(), {"localization": table}, seed=3, n=4, profile="quick")
    r2 = build_report("verify", {"seed": 3}, _checks(), {"localization": table.copy()}, seed=3, n=4, profile="quick")
    text = report_to_yaml(r1)
    assert text == report_to_yaml(r2)
    data = yaml.safe_load(text)
    assert list(data)[:2] == ["command", "inputs_digest"]
    assert "wall_time" not in data
    assert data["tables"]["localization"][1] == {"t": 0.1, "error": 5e-4}


class TestReportFiles(unittest.TestCase):
    def setUp(self):
        self.tmpdir = Path(tempfile.mkdtemp(prefix="test_reports_"))

    def tearDown(self):
        shutil.rmtree(self.tmpdir, ignore_errors=True)

    def test_write_then_read(self):
        report = build_report("ahat", {"file": "abc"}, _checks(), n=4)
        path = write_report(report, self.tmpdir / "nested" / "ahat.yaml")
        self.assertTrue(path.exists())
        back = read_report(path)
        self.assertEqual(back.command, "ahat")
        self.assertEqual(back.inputs_digest, report.inputs_digest)
        self.assertEqual(len(back.checks), 2)
        self.assertAlmostEqual(back.checks[1].order, 1.02)

    def test_timing_is_opt_in(self):
        report = build_report("ahat", {}, _checks(), wall_time=1.5)
        path = write_report(report, self.tmpdir / "timed.yaml")
        self.assertEqual(read_report(path).wall_time, 1.5)
