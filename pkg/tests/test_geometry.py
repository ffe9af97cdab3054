# tests/test_geometry.py

import unittest

import numpy as np
import pytest

from src.clifford import SpinElement, ad_matrix
from src.errors import DomainError, IdentityMismatchError
from src.exterior import Vector
from src.geometry import (
    FIXTURE_TENSORS,
    RiemannTensor,
    ad_block,
    distance_quadratic_form,
    distance_quadratic_forms,
    exp_differential,
    jacobian_factor,
    omega_from_riemann,
    phi0,
    random_riemann,
    riemann_from_components,
    riemann_violations,
    sphere_riemann,
    tau_a_omega,
    theorem1_eval,
    theorem1_sides,
    theorem2_eval,
    theorem2_sides,
)
from src.nilpotent import EvenForm


class TestRiemannTensor(unittest.TestCase):
    def test_random_tensors_satisfy_identities(self):
        rng = np.random.default_rng(0)
        for n in (2, 4, 6):
            R = random_riemann(n, rng)
            self.assertLess(max(riemann_violations(R.components).values()), 1e-12)

    def test_bianchi_violation_named(self):
        r = np.zeros((4,) * 4)
        # pair and antisymmetry hold, first Bianchi does not
        for (a, b, c, d), s in [((0, 1, 2, 3), 1), ((1, 0, 2, 3), -1), ((0, 1, 3, 2), -1), ((1, 0, 3, 2), 1)]:
            r[a, b, c, d] = s
            r[c, d, a, b] = s
        with self.assertRaisesRegex(DomainError, "Bianchi"):
            RiemannTensor(r)

    def test_antisymmetry_violation(self):
        r = np.zeros((2,) * 4)
        r[0, 1, 0, 1] = 1.0
        with self.assertRaises(DomainError):
            RiemannTensor(r)

    def test_sphere(self):
        R = sphere_riemann(4, 2.0)
        self.assertEqual(R[1, 2, 1, 2], 2.0)
        self.assertEqual(R[1, 2, 2, 1], -2.0)
        self.assertEqual(R[1, 2, 3, 4], 0.0)

    def test_components_fill_orbits(self):
        R = riemann_from_components(4, {(1, 2, 3, 4): 2.0, (1, 3, 2, 4): 1.0, (1, 4, 2, 3): -1.0})
        self.assertEqual(R[3, 4, 1, 2], 2.0)
        self.assertEqual(R[2, 1, 3, 4], -2.0)

    def test_fixture_tensors_are_valid(self):
        for name, build in FIXTURE_TENSORS.items():
            self.assertEqual(build().dimension, 4, name)


class TestPointwiseGeometry(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(3)
        self.R = random_riemann(4, self.rng, scale=0.3)
        self.omega = omega_from_riemann(self.R)

    def test_omega_antisymmetric(self):
        np.testing.assert_allclose(self.omega.data, -self.omega.data.transpose(1, 0, 2))

    def test_tau_a_omega_pairing(self):
        # M[l, k] = 2 Σ_p a_p Ω_kl^p
        A = SpinElement.from_mapping(4, {(1, 2): 1.0})
        T = tau_a_omega(A, self.omega).matrix
        np.testing.assert_allclose(T, -T.T, atol=1e-14)
        np.testing.assert_allclose(T[1, 0], 2.0 * self.omega.data[0, 1, 0])

    def test_phi0_and_jacobian_at_origin(self):
        A = SpinElement(4)
        self.assertAlmostEqual(phi0(A, self.omega), 1.0)
        self.assertAlmostEqual(jacobian_factor(A), 1.0)

    def test_jacobian_is_determinant_of_vertical_block(self):
        A = SpinElement(4, self.rng.normal(size=6) * 0.3)
        D = exp_differential(A, self.omega)
        self.assertAlmostEqual(jacobian_factor(A), float(np.linalg.det(D.vertical)))
        self.assertEqual(D.matrix.shape, (10, 10))

    def test_ad_block_matches_series(self):
        A = SpinElement(4, self.rng.normal(size=6) * 0.4)
        X = ad_matrix(A)
        series, term = np.zeros_like(X), np.eye(X.shape[0])
        for k in range(1, 40):
            series += term / k
            term = -term @ X / k
        np.testing.assert_allclose(ad_block(A), series, atol=1e-12)

    def test_distance_forms_agree(self):
        A = SpinElement(4, self.rng.normal(size=6) * 0.3)
        v = Vector(self.rng.normal(size=4))
        inverse_form, coth_form = distance_quadratic_forms(v, A, self.omega)
        self.assertAlmostEqual(inverse_form, coth_form, places=10)
        self.assertAlmostEqual(distance_quadratic_form(v, A, self.omega), inverse_form)

    def test_distance_form_flat(self):
        v = Vector([1.0, 2.0, 0.0, -1.0])
        flat = omega_from_riemann(RiemannTensor.zeros(4))
        self.assertAlmostEqual(distance_quadratic_form(v, SpinElement(4, np.ones(6) * 0.2), flat), 6.0)


class TestGrassmannIdentities(unittest.TestCase):
    def test_theorem1_flat_is_one(self):
        out = theorem1_eval(RiemannTensor.zeros(4))
        self.assertTrue(out.allclose(EvenForm.scalar(4, 1.0)))

    def test_theorem1_round_s2(self):
        # R_x is nilpotent of square zero for n = 2, so Â = 1
        out = theorem1_eval(sphere_riemann(2))
        self.assertTrue(out.allclose(EvenForm.scalar(2, 1.0), atol=1e-10))

    def test_theorem1_random(self):
        rng = np.random.default_rng(4)
        for n in (4, 6):
            left, right = theorem1_sides(random_riemann(n, rng))
            self.assertLess(float(np.max(np.abs(left.data - right.data))), 1e-10)

    def test_theorem2_flat_is_norm_squared(self):
        v = Vector([0.5, -1.0, 2.0, 0.0])
        out = theorem2_eval(v, RiemannTensor.zeros(4))
        self.assertTrue(out.allclose(EvenForm.scalar(4, v.norm_squared()), atol=1e-12))

    def test_theorem2_random(self):
        rng = np.random.default_rng(5)
        for n in (2, 4, 6):
            v = Vector(rng.normal(size=n))
            left, right = theorem2_sides(v, random_riemann(n, rng))
            self.assertLess(float(np.max(np.abs(left.data - right.data))), 1e-10)

    def test_mismatch_raises(self):
        # a negative tolerance rejects every result
        with self.assertRaises(IdentityMismatchError):
            theorem1_eval(random_riemann(4, np.random.default_rng(6)), tol=-1.0)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 3.0])
def test_sphere_ahat_top_vanishes(kappa):
    left, _ = theorem1_sides(sphere_riemann(4, kappa))
    assert left.top() == pytest.approx(0.0, abs=1e-12)
    assert left.body == pytest.approx(1.0)
    assert left.coefficient((1, 2)) == pytest.approx(0.0, abs=1e-12)
