# tests/test_getzler.py

import math
import unittest
from fractions import Fraction

import numpy as np
import pytest

from models.schemas import QuadratureSpec
from src.errors import DimensionError, DomainError, UnboundedOrderError
from src.exterior import Multivector, Vector
from src.geometry import FIXTURE_TENSORS, RiemannTensor, random_riemann, sphere_riemann
from src.getzler import (
    GaussianPrefactor,
    KernelExpansion,
    ahat_form,
    getzler_order_and_symbol,
    getzler_rescale,
    index_density,
    mehler_expansion,
    mehler_kernel,
    parabolic_rescale,
    supertrace_from_symbol,
    theorem3_check,
)


def _mv(n, mapping):
    return Multivector.from_mapping(n, mapping)


class TestRescaling(unittest.TestCase):
    def test_top_blade_scales_inversely(self):
        kappa = KernelExpansion.constant(_mv(2, {(1, 2): 1.0}))
        out = getzler_rescale(kappa, 0.5).evaluate()
        self.assertTrue(out.allclose(_mv(2, {(1, 2): 4.0})))

    def test_vector_monomial_scales_with_u(self):
        kappa = KernelExpansion.monomial(Multivector.scalar(2, 1.0), (1, 0))
        out = getzler_rescale(kappa, 0.5).evaluate(v=[2.0, 0.0])
        self.assertAlmostEqual(out.scalar_part().real, 1.0)

    def test_degree_one_times_v_is_invariant(self):
        kappa = KernelExpansion.monomial(_mv(2, {(1,): 1.0}), (0, 1))
        out = getzler_rescale(kappa, 0.1).evaluate(v=[0.0, 3.0])
        self.assertAlmostEqual(out[(1,)].real, 3.0)

    def test_parabolic_scales_time(self):
        kappa = KernelExpansion.monomial(Multivector.scalar(2, 1.0), (0, 0), p=1)
        self.assertAlmostEqual(parabolic_rescale(kappa, 0.5).evaluate(t=1.0).scalar_part().real, 0.25)
        self.assertAlmostEqual(getzler_rescale(kappa, 0.5).evaluate(t=1.0).scalar_part().real, 1.0)

    def test_rescalings_compose(self):
        rng = np.random.default_rng(0)
        kappa = KernelExpansion(4, {
            ((1, 0, 2, 0), Fraction(1, 2), 0): Multivector(4, rng.normal(size=16)),
            ((0, 0, 0, 0), Fraction(0), 1): Multivector(4, rng.normal(size=16)),
        }, GaussianPrefactor())
        v = rng.normal(size=4)
        twice = parabolic_rescale(parabolic_rescale(kappa, 0.5), 0.3)
        once = parabolic_rescale(kappa, 0.15)
        self.assertTrue(twice.evaluate(v, 0.7, 1.0).allclose(once.evaluate(v, 0.7, 1.0), atol=1e-10))

    def test_zero_parameter(self):
        kappa = KernelExpansion.constant(Multivector.scalar(2, 1.0))
        with self.assertRaises(DomainError):
            getzler_rescale(kappa, 0.0)
        with self.assertRaises(DomainError):
            parabolic_rescale(kappa, 0)


class TestKernelExpansion(unittest.TestCase):
    def test_zero_terms_dropped(self):
        self.assertTrue(KernelExpansion.constant(Multivector(2)).is_empty())

    def test_multi_index_length(self):
        with self.assertRaises(DimensionError):
            KernelExpansion.monomial(Multivector.scalar(4, 1.0), (1, 0))

    def test_product_wedges_coefficients(self):
        a = KernelExpansion.monomial(_mv(2, {(1,): 1.0}), (1, 0))
        b = KernelExpansion.monomial(_mv(2, {(2,): 1.0}), (0, 1))
        out = (a * b).evaluate(v=[2.0, 3.0])
        self.assertTrue(out.allclose(_mv(2, {(1, 2): 6.0})))

    def test_prefactor_rules(self):
        a = KernelExpansion.constant(Multivector.scalar(2, 1.0), GaussianPrefactor())
        b = KernelExpansion.constant(Multivector.scalar(2, 1.0))
        with self.assertRaises(DomainError):
            a + b
        with self.assertRaises(DomainError):
            a * a
        self.assertEqual((a * b).prefactor, GaussianPrefactor())

    def test_gaussian_prefactor(self):
        pre = GaussianPrefactor()
        self.assertAlmostEqual(pre.value(2, np.zeros(2), 1.0), 1.0 / (4.0 * math.pi))
        self.assertAlmostEqual(pre.value(2, np.array([2.0, 0.0]), 1.0), math.exp(-1.0) / (4.0 * math.pi))


class TestOrderAndSymbol(unittest.TestCase):
    def setUp(self):
        self.kappa = KernelExpansion(2, {
            ((0, 0), Fraction(0), 0): _mv(2, {(): 1.0, (1, 2): 1.0}),
            ((1, 0), Fraction(0), 0): _mv(2, {(1,): 1.0}),
        })

    def test_order_and_symbol(self):
        m, symbol = getzler_order_and_symbol(self.kappa)
        self.assertEqual(m, 2)
        self.assertTrue(symbol.evaluate(v=[5.0, 5.0]).allclose(_mv(2, {(1, 2): 1.0})))

    def test_symbol_is_the_limit(self):
        m, symbol = getzler_order_and_symbol(self.kappa)
        u = 1e-4
        v = [0.3, -0.7]
        limit = getzler_rescale(self.kappa, u).evaluate(v) * u ** m
        self.assertTrue(limit.allclose(symbol.evaluate(v), atol=1e-7))

    def test_supertrace_cases(self):
        self.assertEqual(supertrace_from_symbol(self.kappa), pytest.approx(-2j))
        scalar = KernelExpansion.constant(Multivector.scalar(2, 3.0))
        self.assertEqual(supertrace_from_symbol(scalar), 0j)

    def test_order_above_dimension(self):
        kappa = KernelExpansion.monomial(_mv(2, {(1, 2): 1.0}), (0, 0), q=-1)
        self.assertEqual(getzler_order_and_symbol(kappa)[0], 3)
        with self.assertRaises(UnboundedOrderError):
            supertrace_from_symbol(kappa)

    def test_empty_kernel(self):
        with self.assertRaises(UnboundedOrderError):
            getzler_order_and_symbol(KernelExpansion(2, {}))


class TestMehler(unittest.TestCase):
    def test_flat_kernel_is_gaussian(self):
        v = Vector([0.3, -0.2, 1.0, 0.5])
        t = 0.7
        out = mehler_kernel(RiemannTensor.zeros(4), v, t)
        expected = (4 * math.pi * t) ** -2 * math.exp(-v.norm_squared() / (4 * t))
        self.assertAlmostEqual(out.body, expected, places=14)
        self.assertEqual(float(np.max(np.abs(out.nilpotent().data))), 0.0)

    def test_time_must_be_positive(self):
        with self.assertRaises(DomainError):
            mehler_kernel(RiemannTensor.zeros(2), [0.0, 0.0], 0.0)

    def test_expansion_matches_closed_form(self):
        rng = np.random.default_rng(1)
        for n in (2, 4):
            R = random_riemann(n, rng, scale=0.3)
            v = rng.uniform(-0.5, 0.5, size=n)
            for t in (0.3, 1.0):
                closed = mehler_kernel(R, v, t).to_multivector()
                self.assertTrue(mehler_expansion(R).evaluate(v, t).allclose(closed, atol=1e-10))

    def test_parabolic_order_is_dimension(self):
        rng = np.random.default_rng(2)
        for R in (RiemannTensor.zeros(4), random_riemann(4, rng), random_riemann(2, rng)):
            m, _ = getzler_order_and_symbol(mehler_expansion(R), parabolic=True)
            self.assertEqual(m, R.dimension)


class TestIndexDensity(unittest.TestCase):
    def test_vanishes_without_pontryagin_form(self):
        for R in (RiemannTensor.zeros(4), sphere_riemann(4), FIXTURE_TENSORS["s2xs2"](), sphere_riemann(2)):
            self.assertAlmostEqual(index_density(R), 0.0, places=12)

    def test_quadratic_in_curvature_for_n4(self):
        R = FIXTURE_TENSORS["cp2"]()
        self.assertAlmostEqual(index_density(R.scaled(2.0)), 4.0 * index_density(R), places=10)
        self.assertNotAlmostEqual(index_density(R), 0.0, places=6)

    def test_symbol_supertrace_is_density(self):
        rng = np.random.default_rng(3)
        for R in (FIXTURE_TENSORS["cp2"](), random_riemann(4, rng)):
            value = supertrace_from_symbol(mehler_expansion(R), parabolic=True)
            self.assertAlmostEqual(value.real, index_density(R), places=10)
            self.assertAlmostEqual(value.imag, 0.0, places=10)

    def test_ahat_body(self):
        self.assertAlmostEqual(ahat_form(random_riemann(6, np.random.default_rng(4))).body, 1.0)


@pytest.mark.slow
def test_rescaled_model_kernel_converges_n2():
    rng = np.random.default_rng(5)
    R = random_riemann(2, rng, scale=0.3)
    v = Vector(rng.uniform(-0.5, 0.5, size=2))
    report = theorem3_check(R, v, [0.4, 0.2, 0.1, 0.05], QuadratureSpec(size=30))
    assert report.passed, report.table
    assert report.divergent_order <= 0.0
