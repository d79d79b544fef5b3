import math

import numpy as np
import pytest
from scipy import integrate as sci
from scipy.special import sici

from ksnorm.errors import DomainError
from ksnorm.fields import CallableField, ExprField, IndicatorBoxField
from ksnorm.gauge import (Gauge, TaggedPartition, alexiewicz_norm, fine_partition,
                          hk_integrate_1d, hk_integrate_box, is_fine, riemann_sum,
                          vitali_variation)


class TestPartitions:
    def test_fine_for_generous_gauge(self):
        p = TaggedPartition.uniform(0, 1, 4, "mid")
        assert is_fine(p, Gauge(0, 1, lambda t: 1.0))

    def test_not_fine_for_tight_gauge(self):
        p = TaggedPartition.uniform(0, 1, 4, "mid")
        assert not is_fine(p, Gauge(0, 1, lambda t: 0.1))

    def test_tag_outside_cell_rejected(self):
        with pytest.raises(DomainError):
            TaggedPartition(np.array([0.0, 0.5, 1.0]), np.array([-0.1, 0.75]))

    def test_domain_mismatch(self):
        p = TaggedPartition.uniform(0, 1, 4, "mid")
        with pytest.raises(DomainError):
            is_fine(p, Gauge(0, 2, lambda t: 1.0))

    def test_cousin_construction_is_fine(self):
        gauge = Gauge(0, 1, lambda t: 0.05 + 0.2 * t)
        p = fine_partition(gauge)
        assert is_fine(p, gauge)
        assert p.a == 0.0 and p.b == 1.0


class TestRiemannSum:
    def test_constant(self):
        p = TaggedPartition.uniform(0, 1, 7, "mid")
        assert abs(riemann_sum(lambda x: np.ones_like(x), p) - 1.0) < 1e-15

    def test_linear_midpoint_exact(self):
        p = TaggedPartition.uniform(0, 1, 2, "mid")
        assert abs(riemann_sum(lambda x: x, p) - 0.5) < 1e-15

    def test_quadratic_left_tags(self):
        p = TaggedPartition.uniform(0, 1, 4, "left")
        # direct 4-term sum: (1/4)(0 + 1/16 + 4/16 + 9/16)
        assert abs(riemann_sum(lambda x: x**2, p) - 0.21875) < 1e-15

    def test_converges_to_integral_as_gauge_shrinks(self):
        targets = {
            "poly": (lambda x: 3 * x**2, 1.0),
            "trig": (np.cos, math.sin(1.0)),
            "exp": (np.exp, math.e - 1.0),
        }
        for f, target in targets.values():
            errs = []
            for delta in (0.2, 0.05, 0.0125):
                p = fine_partition(Gauge(0, 1, lambda t, d=delta: d))
                errs.append(abs(riemann_sum(f, p) - target))
            assert errs[-1] < errs[0]
            assert errs[-1] < 1e-3


class TestHkIntegrate:
    def test_polynomial(self):
        res = hk_integrate_1d(lambda x: 2 * x, 0, 1, tol=1e-10)
        assert res.converged
        assert abs(res.value - 1.0) < 1e-10

    def test_oscillatory_derivative_of_x2_sin_inv_x2(self):
        f = lambda x: 2 * x * np.sin(x**-2) - (2 / x) * np.cos(x**-2)
        res = hk_integrate_1d(f, 0, 1, tol=1e-6)
        assert res.converged
        assert abs(res.value - math.sin(1.0)) < 1e-6

    def test_hake_sqrt_singularity(self):
        res = hk_integrate_1d(lambda x: x**-0.5, 0, 1, tol=1e-8)
        assert res.converged
        assert abs(res.value - 2.0) < 1e-8

    def test_interior_singularity_supplied(self):
        # int_-1^1 |x|^{-1/2} = 4
        res = hk_integrate_1d(lambda x: np.abs(x)**-0.5, -1, 1, tol=1e-8,
                              singularities=[0.0])
        assert abs(res.value - 4.0) < 1e-7

    def test_linearity_on_random_polynomials(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            ca, cb = rng.uniform(-1, 1, size=(2, 4))
            alpha, beta = rng.uniform(-2, 2, size=2)
            fa = lambda x: np.polyval(ca, x)
            fb = lambda x: np.polyval(cb, x)
            tol = 1e-10
            both = hk_integrate_1d(lambda x: alpha * fa(x) + beta * fb(x), 0, 1, tol=tol)
            ia = hk_integrate_1d(fa, 0, 1, tol=tol)
            ib = hk_integrate_1d(fb, 0, 1, tol=tol)
            assert abs(both.value - alpha * ia.value - beta * ib.value) < 2 * tol

    def test_hake_consistency_with_fixed_quadrature(self):
        f = lambda x: np.exp(-x) * np.sin(3 * x)
        res = hk_integrate_1d(f, 0, 2, tol=1e-10)
        ref = sci.fixed_quad(f, 0, 2, n=40)[0]
        assert abs(res.value - ref) < 1e-9

    def test_box_constant(self):
        res = hk_integrate_box(lambda p: np.ones(p.shape[0]), [0, 0], [1, 1])
        assert abs(res.value - 1.0) < 1e-10

    def test_box_separable(self):
        res = hk_integrate_box(lambda p: p[:, 0] * p[:, 1], [0, 0], [1, 1])
        assert abs(res.value - 0.25) < 1e-10

    def test_box_improper_exponential(self):
        res = hk_integrate_box(lambda p: np.exp(-p[:, 0] - p[:, 1]),
                               [0, 0], [math.inf, math.inf], tol=1e-8)
        assert res.converged
        assert abs(res.value - 1.0) < 1e-8


class TestAlexiewicz:
    def test_zero_field(self):
        rep = alexiewicz_norm(IndicatorBoxField([0], [1], 1) * 0.0, tol=1e-8)
        assert rep.value < 1e-10

    def test_indicator(self):
        rep = alexiewicz_norm(IndicatorBoxField([0], [1], 1), tol=1e-8)
        assert abs(rep.value - 1.0) < 1e-7

    def test_sinc_matches_sine_integral(self):
        rep = alexiewicz_norm(CallableField(lambda x: np.sin(x) / x, 1), tol=1e-4)
        target = math.pi / 2 + sici(math.pi)[0]
        assert abs(rep.value - target) < 1e-4
        assert abs(rep.extras["argmax"] - math.pi) < 0.1

    def test_2d_nonnegative_bump(self):
        f = ExprField.parse(
            "indicator(0,1; x_1)*indicator(0,1; x_2)*x_1*x_2", 2,
            support=([0, 0], [1, 1]))
        rep = alexiewicz_norm(f, search_box=([0, 0], [1, 1]), tol=1e-5)
        assert abs(rep.value - 0.25) < 1e-4


class TestVitali:
    def test_constant_is_zero(self):
        f = ExprField.parse("3", 2)
        assert vitali_variation(f, ([0, 0], [1, 1])) < 1e-12

    def test_bilinear(self):
        f = ExprField.parse("x_1*x_2", 2)
        assert abs(vitali_variation(f, ([0, 0], [1, 1])) - 1.0) < 1e-10

    def test_product_of_sines(self):
        f = ExprField.parse("sin(x_1)*sin(x_2)", 2)
        v = vitali_variation(f, ([0, 0], [math.pi, math.pi]), tol=1e-10)
        assert abs(v - 4.0) < 1e-8

    def test_1d_total_variation(self):
        f = ExprField.parse("cos(x_1)", 1)
        v = vitali_variation(f, ([0.0], [2 * math.pi]))
        assert abs(v - 4.0) < 1e-9


class TestMultiplierInequality:
    def test_random_pairs(self):
        from ksnorm.ensembles import make_rng, random_piecewise_poly, smooth_multiplier

        rng = make_rng(5)
        for trial in range(25):
            n = 1 if trial < 13 else 2
            box = (np.full(n, -1.0), np.full(n, 1.0))
            f = random_piecewise_poly(rng, n, radius=1.0)
            g = smooth_multiplier(rng, n, box[0], box[1])
            prod = hk_integrate_box(
                CallableField(lambda p, f=f, g=g: f(p) * g(p), n),
                box[0], box[1], tol=1e-9)
            a_norm = alexiewicz_norm(f, search_box=box, tol=1e-7).value
            var_g = vitali_variation(g, box, tol=1e-8)
            assert abs(prod.value) <= a_norm * var_g + 1e-6
