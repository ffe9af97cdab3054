# tests/test_spinors.py

from unittest.mock import patch

import numpy as np
import pytest

from src.clifford import clifford_mul
from src.errors import DimensionError, IdentityMismatchError
from src.exterior import Multivector, berezin
from src.spinors import (
    SpinorOperator,
    check_clifford_relations,
    chirality,
    clifford_from_matrix,
    gamma_matrices,
    rho,
    supertrace,
    supertrace_constant,
)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_clifford_relations(n):
    assert check_clifford_relations(n) <= 1e-12


def test_clifford_relations_report_corruption():
    gammas = gamma_matrices(4)
    bent = (gammas[0] * 1.001,) + gammas[1:]
    with patch("src.spinors.gamma_matrices", return_value=bent):
        with pytest.raises(IdentityMismatchError) as exc:
            check_clifford_relations(4)
    assert exc.value.max_error > 1e-3
    assert "Clifford relations" in str(exc.value)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_chirality_is_a_grading(n):
    gamma = chirality(n).matrix
    np.testing.assert_allclose(gamma @ gamma, np.eye(gamma.shape[0]), atol=1e-12)
    for g in gamma_matrices(n):
        np.testing.assert_allclose(gamma @ g + g @ gamma, 0.0, atol=1e-12)


@pytest.mark.parametrize("n", [2, 4])
def test_rho_is_multiplicative(n):
    rng = np.random.default_rng(n)
    a = Multivector(n, rng.normal(size=1 << n))
    b = Multivector(n, rng.normal(size=1 << n))
    assert rho(clifford_mul(a, b)).allclose(rho(a) @ rho(b))


def test_matrix_round_trip():
    rng = np.random.default_rng(9)
    a = Multivector(4, rng.normal(size=16) + 1j * rng.normal(size=16))
    assert clifford_from_matrix(rho(a)).allclose(a, atol=1e-12)


def test_supertrace_n2_by_hand():
    assert supertrace_constant(2) == pytest.approx(-2j)
    assert supertrace(rho(Multivector.blade(2, (1, 2)))) == pytest.approx(-2j)
    assert supertrace(rho(Multivector.scalar(2, 1.0))) == pytest.approx(0.0)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_supertrace_reads_top_degree(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(5):
        a = Multivector(n, rng.normal(size=1 << n))
        assert supertrace(rho(a)) == pytest.approx(supertrace_constant(n) * berezin(a), abs=1e-10)


def test_supertrace_vanishes_on_commutators():
    rng = np.random.default_rng(21)
    a = rho(Multivector(4, rng.normal(size=16)))
    b = rho(Multivector(4, rng.normal(size=16)))
    # str kills commutators with an even element
    ae = rho(Multivector(4, np.where([bin(m).count("1") % 2 == 0 for m in range(16)], rng.normal(size=16), 0.0)))
    assert supertrace(ae @ b - b @ ae) == pytest.approx(0.0, abs=1e-10)
    assert a.trace() == pytest.approx(np.trace(a.matrix))


def test_operator_shape_checked():
    with pytest.raises(DimensionError):
        SpinorOperator(4, np.eye(3))
