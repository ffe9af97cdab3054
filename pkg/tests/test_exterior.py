# tests/test_exterior.py

import unittest

import numpy as np
import pytest

from src.errors import DimensionError
from src.exterior import (
    Multivector,
    Vector,
    apply_exterior_power,
    berezin,
    check_dimension,
    exp_wedge,
    exterior_power_matrix,
    grade_project,
    indices_to_mask,
    interior,
    wedge,
    wedge_power,
)


def _random_mv(n, rng, grade=None):
    data = rng.normal(size=1 << n) + 0j
    a = Multivector(n, data)
    return a if grade is None else grade_project(a, grade)


class TestBlades(unittest.TestCase):
    def test_indices_to_mask_sign(self):
        self.assertEqual(indices_to_mask((1, 2), 4), (1, 0b11))
        self.assertEqual(indices_to_mask((2, 1), 4), (-1, 0b11))
        # repeated index kills the blade
        self.assertEqual(indices_to_mask((1, 1), 4)[0], 0)

    def test_check_dimension(self):
        self.assertEqual(check_dimension(4), 4)
        for bad in (0, 3, 10):
            with self.assertRaises(DimensionError):
                check_dimension(bad)

    def test_from_mapping_reorders(self):
        a = Multivector.from_mapping(4, {(2, 1): 3.0})
        self.assertEqual(a[(1, 2)], -3.0)


class TestWedge(unittest.TestCase):
    def setUp(self):
        self.n = 4
        self.e = [Multivector.blade(self.n, (k,)) for k in range(1, self.n + 1)]

    def test_anticommutes_on_vectors(self):
        e1, e2 = self.e[0], self.e[1]
        self.assertTrue(wedge(e1, e2).allclose(-wedge(e2, e1)))
        self.assertEqual(wedge(e1, e1).norm(), 0.0)

    def test_graded_commutativity(self):
        rng = np.random.default_rng(3)
        a = _random_mv(self.n, rng, 1)
        b = _random_mv(self.n, rng, 2)
        self.assertTrue(wedge(a, b).allclose(wedge(b, a), atol=1e-12))

    def test_associative(self):
        rng = np.random.default_rng(4)
        a, b, c = (_random_mv(self.n, rng) for _ in range(3))
        self.assertTrue(wedge(wedge(a, b), c).allclose(wedge(a, wedge(b, c)), atol=1e-10))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            wedge(Multivector.scalar(2), Multivector.scalar(4))

    def test_wedge_power_negative(self):
        with self.assertRaises(ValueError):
            wedge_power(self.e[0], -1)


class TestInteriorAndBerezin(unittest.TestCase):
    def test_interior_on_blade(self):
        e12 = Multivector.blade(2, (1, 2))
        self.assertTrue(interior(Vector.basis(2, 1), e12).allclose(Multivector.blade(2, (2,))))
        self.assertTrue(interior(Vector.basis(2, 2), e12).allclose(-Multivector.blade(2, (1,))))

    def test_interior_is_graded_derivation(self):
        rng = np.random.default_rng(11)
        n = 4
        v = Vector(rng.normal(size=n))
        a = _random_mv(n, rng, 1)
        b = _random_mv(n, rng)
        lhs = interior(v, wedge(a, b))
        rhs = wedge(interior(v, a), b) - wedge(a, interior(v, b))
        self.assertTrue(lhs.allclose(rhs, atol=1e-10))

    def test_interior_squares_to_zero(self):
        rng = np.random.default_rng(12)
        v = Vector(rng.normal(size=4))
        a = _random_mv(4, rng)
        self.assertLess(interior(v, interior(v, a)).norm(), 1e-12)

    def test_berezin_reads_top_coefficient(self):
        self.assertEqual(berezin(Multivector.top(4, 2.5)), 2.5)
        self.assertEqual(berezin(Multivector.blade(4, (1, 2, 3))), 0.0)
        self.assertEqual(berezin(Multivector.blade(4, (2, 1, 3, 4))), -1.0)


class TestExponentials(unittest.TestCase):
    def test_exp_wedge_of_two_blades(self):
        a = Multivector.from_mapping(4, {(1, 2): 1.0, (3, 4): 1.0})
        expected = Multivector.from_mapping(4, {(): 1.0, (1, 2): 1.0, (3, 4): 1.0, (1, 2, 3, 4): 1.0})
        self.assertTrue(exp_wedge(a).allclose(expected))

    def test_exp_wedge_scalar_part(self):
        a = Multivector.scalar(2, 0.5) + Multivector.blade(2, (1, 2), 2.0)
        out = exp_wedge(a)
        self.assertAlmostEqual(out.scalar_part().real, np.exp(0.5))
        self.assertAlmostEqual(out[(1, 2)].real, 2.0 * np.exp(0.5))


class TestExteriorPower(unittest.TestCase):
    def test_identity(self):
        np.testing.assert_allclose(exterior_power_matrix(np.eye(4)), np.eye(16))

    def test_top_degree_scales_by_determinant(self):
        rng = np.random.default_rng(5)
        B = rng.normal(size=(4, 4))
        out = apply_exterior_power(B, Multivector.top(4))
        self.assertAlmostEqual(berezin(out).real, np.linalg.det(B))

    def test_multiplicative(self):
        rng = np.random.default_rng(6)
        A, B = rng.normal(size=(2, 4, 4))
        np.testing.assert_allclose(
            exterior_power_matrix(A @ B), exterior_power_matrix(A) @ exterior_power_matrix(B), atol=1e-10
        )

    def test_is_algebra_map(self):
        rng = np.random.default_rng(7)
        B = rng.normal(size=(4, 4))
        a, b = _random_mv(4, rng), _random_mv(4, rng)
        lhs = apply_exterior_power(B, wedge(a, b))
        rhs = wedge(apply_exterior_power(B, a), apply_exterior_power(B, b))
        assert lhs.allclose(rhs, atol=1e-9)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_vector_wedge_square_vanishes(n):
    rng = np.random.default_rng(n)
    v = Vector(rng.normal(size=n)).to_multivector()
    assert wedge(v, v).norm() < 1e-12
