# tests/test_convergence.py

import math

import numpy as np
import pytest

from src.convergence import (
    convergence_table,
    extrapolate_to_zero,
    fit_order,
    fit_order_details,
    require_convergent,
    richardson,
)
from src.errors import ConvergenceError


def test_second_order_slope():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    fit = fit_order_details(h, 3.0 * h ** 2)
    assert fit.order == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(math.log(3.0))
    assert fit.r2 == pytest.approx(1.0)


def test_exact_sequence_reports_infinite_order():
    assert fit_order([0.2, 0.1], [0.0, 1e-16]) == math.inf


def test_bad_input():
    with pytest.raises(ValueError):
        fit_order([0.1], [0.01])
    with pytest.raises(ValueError):
        fit_order([0.1, 0.2], [0.01])
    with pytest.raises(ValueError):
        fit_order([0.1, 0.0], [0.01, 0.001])


def test_divergent_sequence_rejected():
    with pytest.raises(ConvergenceError):
        require_convergent([0.2, 0.1, 0.05], [1.0, 2.0, 4.0], "growing")
    assert require_convergent([0.2, 0.1], [0.2, 0.1]) == pytest.approx(1.0)


def test_neville_recovers_polynomial_limit():
    h = np.array([0.3, 0.2, 0.1])
    values = np.stack([1.5 + 2.0 * h - h ** 2, -h]).T
    np.testing.assert_allclose(extrapolate_to_zero(h, values), [1.5, 0.0], atol=1e-13)


def test_neville_length_mismatch():
    with pytest.raises(ValueError):
        extrapolate_to_zero([0.1, 0.05], np.zeros((3, 2)))


def test_richardson_cancels_leading_term():
    f = lambda h: 2.0 + 0.5 * h
    assert richardson(0.1, f(0.1), 0.05, f(0.05), 1.0) == pytest.approx(2.0)
    g = lambda h: 2.0 + 0.5 * h ** 2
    assert richardson(0.1, g(0.1), 0.05, g(0.05), 2.0) == pytest.approx(2.0)


def test_table_local_orders():
    h = [0.4, 0.2, 0.1]
    df = convergence_table(h, [0.16, 0.04, 0.01], "t")
    assert list(df.columns) == ["t", "error", "local_order"]
    assert np.isnan(df["local_order"].iloc[0])
    np.testing.assert_allclose(df["local_order"].iloc[1:], [2.0, 2.0])
