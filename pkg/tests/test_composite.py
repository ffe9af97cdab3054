# tests/test_composite.py

import unittest

import numpy as np

from src.clifford import SpinElement
from src.composite import Apply, Const, Coord, VecComp, evaluate_pointwise, from_dict, grassmann_eval, uses_vector
from src.errors import DimensionError, DomainError
from src.geometry import (
    coth_composite,
    jacobian_composite,
    jacobian_factor,
    omega_from_riemann,
    phi0,
    phi0_composite,
    random_riemann,
)


class TestAlgebra(unittest.TestCase):
    def test_polynomial_degree(self):
        a12, a13 = Coord(1, 2), Coord(1, 3)
        self.assertEqual((a12 ** 2 * a13 + 1.0).polynomial_degree(), 3)
        self.assertEqual((Const(2.0) * VecComp(1)).polynomial_degree(), 0)
        self.assertIsNone(Apply("exp", a12).polynomial_degree())

    def test_coord_needs_ordered_pair(self):
        with self.assertRaises(DimensionError):
            Coord(2, 1)

    def test_uses_vector(self):
        omega = omega_from_riemann(random_riemann(4, np.random.default_rng(0)))
        self.assertTrue(uses_vector(coth_composite(omega)))
        self.assertFalse(uses_vector(phi0_composite(omega)))


class TestEvaluation(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1)
        self.omega = omega_from_riemann(random_riemann(4, self.rng, scale=0.3))
        self.points = self.rng.normal(size=(5, 6)) * 0.2

    def test_polynomial_pointwise(self):
        psi = Coord(1, 2) * Coord(3, 4) - Coord(2, 3) ** 2
        vals = evaluate_pointwise(psi, self.points, 4)
        p = self.points
        np.testing.assert_allclose(vals, p[:, 0] * p[:, 5] - p[:, 3] ** 2, atol=1e-14)

    def test_pointwise_matches_direct_geometry(self):
        vals = evaluate_pointwise(phi0_composite(self.omega), self.points, 4)
        direct = [phi0(SpinElement(4, x), self.omega) for x in self.points]
        np.testing.assert_allclose(vals, direct, rtol=1e-10)
        jac = evaluate_pointwise(jacobian_composite(), self.points, 4)
        np.testing.assert_allclose(jac, [jacobian_factor(SpinElement(4, x)) for x in self.points], rtol=1e-10)

    def test_grassmann_body_is_the_pointwise_value(self):
        psi = phi0_composite(self.omega) * jacobian_composite()
        vals = evaluate_pointwise(psi, self.points, 4)
        for x, val in zip(self.points, vals):
            self.assertAlmostEqual(grassmann_eval(psi, SpinElement(4, x), 2.0).body, val, places=10)

    def test_serialized_composite_evaluates_identically(self):
        v = self.rng.normal(size=4)
        psi = Apply("exp", Const(-0.25) * coth_composite(self.omega)) * phi0_composite(self.omega)
        rebuilt = from_dict(psi.to_dict())
        np.testing.assert_allclose(
            evaluate_pointwise(psi, self.points, 4, v=v), evaluate_pointwise(rebuilt, self.points, 4, v=v), rtol=1e-14
        )

    def test_missing_vector(self):
        with self.assertRaises(DomainError):
            evaluate_pointwise(coth_composite(self.omega), self.points, 4)

    def test_wrong_coordinate_count(self):
        with self.assertRaises(DimensionError):
            evaluate_pointwise(Coord(1, 2), np.zeros((2, 3)), 4)

    def test_unknown_node(self):
        with self.assertRaises(ValueError):
            from_dict({"op": "laplacian"})
