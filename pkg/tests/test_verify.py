# tests/test_verify.py
from unittest.mock import patch

import pytest

import src.verify as verify
from src.errors import ConvergenceError, IdentityMismatchError
from src.profiles import load_profile, merge_overrides
from src.verify import run_suite, run_suites


@pytest.fixture(scope="module")
def quick():
    return load_profile("quick")


@pytest.mark.parametrize("suite", ["supertrace", "hoperator", "theorem1", "theorem2", "oracle1d"])
def test_algebraic_suites_pass_n4(suite, quick):
    outcome = run_suite(suite, 4, 0, quick)
    assert outcome.checks
    assert outcome.passed, [c for c in outcome.checks if not c.passed]


def test_oracle1d_table(quick):
    outcome = run_suite("oracle1d", 2, 0, quick)
    table = outcome.tables["oracle1d"]
    assert len(table) == len(quick.oracle1d_cases) + quick.samples["oracle1d"]
    assert set(table.columns) >= {"a", "t", "x", "y", "closed", "spectral", "relative_error"}


def test_same_seed_same_checks(quick):
    a = run_suite("theorem2", 4, 11, quick)
    b = run_suite("theorem2", 4, 11, quick)
    assert [c.max_error for c in a.checks] == [c.max_error for c in b.checks]


def test_thread_pool_matches_sequential(quick):
    names = ["supertrace", "theorem1", "oracle1d"]
    seq = run_suites(names, 4, 3, quick, jobs=1)
    par = run_suites(names, 4, 3, quick, jobs=2)
    assert [o.suite for o in par] == names
    for s, p in zip(seq, par):
        assert [c.model_dump() for c in s.checks] == [c.model_dump() for c in p.checks]


def test_run_suites_skips_infeasible(quick):
    outcomes = run_suites(["theorem3", "supertrace"], 6, 0, quick, jobs=1)
    assert [o.suite for o in outcomes] == ["supertrace"]


def test_raised_error_becomes_failed_check(quick):
    def boom(n, rng, profile):
        raise ConvergenceError("fitted order -0.5 is not positive")

    with patch.dict(verify.SUITE_FUNCTIONS, {"theorem1": boom}):
        outcome = run_suite("theorem1", 4, 0, quick)
    assert not outcome.passed
    (check,) = outcome.checks
    assert check.name == "suite raised"
    assert "not positive" in check.detail["error"]


def test_identity_mismatch_keeps_values(quick):
    def mismatch(n, rng, profile):
        raise IdentityMismatchError("Φ(2e∧e*)", 1e-3, 1e-10, values=[1.0, 1.001])

    with patch.dict(verify.SUITE_FUNCTIONS, {"theorem2": mismatch}):
        outcome = run_suite("theorem2", 4, 0, quick)
    assert outcome.checks[0].detail["values"] == "[1.0, 1.001]"


def test_failing_tolerance_is_reported(quick):
    strict = merge_overrides(quick, {"tolerances": {"oracle1d": 1e-300}})
    outcome = run_suite("oracle1d", 2, 0, strict)
    first = outcome.checks[0]
    assert not first.passed
    assert first.max_error > first.tolerance


@pytest.mark.slow
def test_localization_suite_n2(quick):
    outcome = run_suite("localization", 2, 0, quick)
    assert outcome.passed, [c.model_dump() for c in outcome.checks if not c.passed]
    assert {"localization Φ₀", "localization coth form"} <= set(outcome.tables)


@pytest.mark.slow
def test_theorem3_suite_n2(quick):
    outcome = run_suite("theorem3", 2, 0, quick)
    names = [c.name for c in outcome.checks]
    assert "parabolic Getzler order of the model kernel" in names
    assert outcome.checks[0].passed and outcome.checks[1].passed
    assert "theorem3" in outcome.tables


def test_supertrace_suite_records_broken_clifford_relations(quick):
    broken = IdentityMismatchError("Clifford relations", 4e-3, 1e-12)
    with patch.object(verify, "check_clifford_relations", side_effect=broken):
        outcome = run_suite("supertrace", 2, 0, quick)
    relations = [c for c in outcome.checks if c.name == "clifford relations"]
    assert len(relations) == 1 and not relations[0].passed
    assert "Clifford relations" in relations[0].detail["error"]
