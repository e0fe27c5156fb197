import numpy as np
import pytest

import toricost as tc
from toricost.errors import UnknownCostError, ValidationError
from toricost.geometry import sample_points
from toricost.systems import (sphere_spin_cost, sphere_spin_perturbed_cost,
                              torus_shear_cost, product_spin_cost)

import oracles

TWO_PI = 2.0 * np.pi


class TestCostFunctions:
    def test_antipodal_equator_points(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        value = cost(np.array([0.0, 0.0]), np.array([np.pi, 0.0]))
        assert value == pytest.approx(4.0, abs=1e-12)

    def test_torus_antipodal_first_circle(self, t2_cos):
        cost = tc.make_cost("chordal-sq", t2_cos.chart)
        value = cost(np.array([0.0, 0.0]), np.array([np.pi, 0.0]))
        assert value == pytest.approx(4.0, abs=1e-12)

    def test_diagonal_is_exactly_zero(self, s2_spin):
        pts = sample_points(s2_spin.chart, 200, seed=1)
        for name in ("chordal", "chordal-sq"):
            cost = tc.make_cost(name, s2_spin.chart)
            assert np.all(cost(pts, pts) == 0.0)

    def test_positive_off_diagonal(self, s2_spin):
        x = sample_points(s2_spin.chart, 1000, seed=2)
        y = sample_points(s2_spin.chart, 1000, seed=3)
        for name in ("chordal", "chordal-sq"):
            cost = tc.make_cost(name, s2_spin.chart)
            assert np.all(cost(x, y) > 0.0)

    def test_symmetry_exact(self, s2xs2):
        x = sample_points(s2xs2.chart, 1000, seed=4)
        y = sample_points(s2xs2.chart, 1000, seed=5)
        for name in ("chordal", "chordal-sq"):
            cost = tc.make_cost(name, s2xs2.chart)
            assert np.array_equal(cost(x, y), cost(y, x))

    def test_chordal_is_sqrt_of_square(self, t2_cos):
        x = sample_points(t2_cos.chart, 100, seed=6)
        y = sample_points(t2_cos.chart, 100, seed=7)
        sq = tc.make_cost("chordal-sq", t2_cos.chart)
        lin = tc.make_cost("chordal", t2_cos.chart)
        assert np.allclose(lin(x, y) ** 2, sq(x, y), rtol=1e-12)

    def test_unknown_name(self, s2_spin):
        with pytest.raises(UnknownCostError):
            tc.make_cost("geodesic", s2_spin.chart)


class TestEstimator:
    def test_full_period_is_numerically_zero(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        est = tc.periodicity_cost(s2_spin, TWO_PI, cost, 100_000, seed=42)
        assert est.value <= 1e-9
        assert est.std_error <= 1e-9

    def test_half_period_matches_closed_form(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        est = tc.periodicity_cost(s2_spin, np.pi, cost, 100_000, seed=42)
        assert abs(est.value - 32 * np.pi / 3) <= 3 * est.std_error

    def test_closed_form_against_independent_bruteforce(self):
        # 1e7-sample brute force with its own formulas brackets 32*pi/3
        value, stderr = oracles.mc_sphere_spin(np.pi, 10_000_000, seed=99)
        assert abs(value - 32 * np.pi / 3) <= 3 * stderr

    def test_torus_shear_matches_bessel_oracle(self, t2_cos):
        cost = tc.make_cost("chordal-sq", t2_cos.chart)
        est = tc.periodicity_cost(t2_cos, 2.0, cost, 100_000, seed=42)
        assert abs(est.value - oracles.closed_torus_shear(2.0)) <= 3 * est.std_error

    def test_time_zero_exactly_zero(self):
        for system_id in ("s2-spin", "t2-cos", "s2xs2-toric"):
            system = tc.build(system_id)
            for name in ("chordal", "chordal-sq"):
                cost = tc.make_cost(name, system.chart)
                est = tc.periodicity_cost(system, [0.0] * system.n, cost,
                                          1000, seed=1)
                assert est.value == 0.0
                assert est.std_error == 0.0

    def test_seed_determinism_bitwise(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        a = tc.periodicity_cost(s2_spin, 1.0, cost, 5000, seed=5)
        b = tc.periodicity_cost(s2_spin, 1.0, cost, 5000, seed=5)
        assert a == b

    def test_nonnegative(self, t2_cos):
        cost = tc.make_cost("chordal", t2_cos.chart)
        for seed in range(5):
            est = tc.periodicity_cost(t2_cos, 0.3, cost, 2000, seed=seed)
            assert est.value >= 0.0 and est.std_error >= 0.0

    def test_sample_count_validation(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        with pytest.raises(ValidationError):
            tc.periodicity_cost(s2_spin, 1.0, cost, 99, seed=1)

    def test_std_error_definition(self, s2_spin):
        # reproduce the estimate by hand from the sampler and the flow
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        est = tc.periodicity_cost(s2_spin, 1.0, cost, 1000, seed=9)
        samples = sample_points(s2_spin.chart, 1000, seed=9,
                                reject=s2_spin.singular.contains)
        values = cost(samples, tc.flow(s2_spin, 1.0, samples))
        volume = tc.total_volume(s2_spin.chart)
        assert est.value == pytest.approx(values.mean() * volume, rel=1e-12)
        assert est.std_error == pytest.approx(
            values.std(ddof=1) * volume / np.sqrt(1000), rel=1e-12)

    def test_region_restriction(self, s2_spin):
        # southern-hemisphere restriction halves the closed form by symmetry
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        est = tc.periodicity_cost(s2_spin, np.pi, cost, 100_000, seed=10,
                                  region=lambda p: p[..., 1] < 0.0)
        assert abs(est.value - 16 * np.pi / 3) <= 3 * est.std_error

    def test_integration_failure_budget(self):
        # a gradient that turns non-finite on half the chart makes the
        # implicit solve fail there; the estimator refuses the run once
        # more than 0.1% of samples error out
        from toricost.dynamics import SystemDef, component_from_callables
        from toricost.errors import NumericError
        from toricost.geometry import torus_chart

        def value(pts):
            return np.cos(pts[..., 0])

        def gradient(pts):
            g = np.zeros_like(pts)
            g[..., 0] = np.where(pts[..., 1] > np.pi, np.nan,
                                 -np.sin(pts[..., 0]))
            return g

        system = SystemDef("broken", torus_chart(),
                           (component_from_callables("broken", value,
                                                     gradient),))
        cost = tc.make_cost("chordal-sq", system.chart)
        with pytest.raises(NumericError):
            tc.periodicity_cost(system, 0.5, cost, 1000, seed=1)

    def test_monotone_refinement_coverage(self):
        # >= 99 of 100 preregistered seeds land within 3 sigma of closed form
        cases = [
            ("s2-spin", (1.0,), sphere_spin_cost(1.0)),
            ("t2-cos", (2.0,), torus_shear_cost(2.0)),
            ("s2xs2-toric", (1.0, 2.0), product_spin_cost((1.0, 2.0))),
        ]
        for system_id, t, target in cases:
            system = tc.build(system_id)
            cost = tc.make_cost("chordal-sq", system.chart)
            hits = 0
            for seed in range(1000, 1100):
                est = tc.periodicity_cost(system, t, cost, 10_000, seed=seed)
                if abs(est.value - target) <= 3 * est.std_error:
                    hits += 1
            assert hits >= 99, (system_id, hits)

    def test_product_additivity(self, s2xs2):
        cost = tc.make_cost("chordal-sq", s2xs2.chart)
        t = (1.0, 2.5)
        est = tc.periodicity_cost(s2xs2, t, cost, 100_000, seed=12)
        target = 4 * np.pi * (oracles.closed_sphere_spin(t[0])
                              + oracles.closed_sphere_spin(t[1]))
        assert abs(est.value - target) <= 3 * est.std_error


class TestQuadratureCrossCheck:
    def test_sphere_spin_matches_closed_form(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        est = tc.periodicity_cost_quadrature(s2_spin, 1.0, cost,
                                             nodes_per_axis=256)
        target = oracles.closed_sphere_spin(1.0)
        assert est.value == pytest.approx(target, rel=1e-4)
        assert est.std_error == 0.0

    def test_torus_shear_spectral_accuracy(self, t2_cos):
        # both coordinates are angles, so the midpoint rule is the periodic
        # trapezoid rule and converges to machine precision
        cost = tc.make_cost("chordal-sq", t2_cos.chart)
        est = tc.periodicity_cost_quadrature(t2_cos, 2.0, cost,
                                             nodes_per_axis=128)
        assert est.value == pytest.approx(oracles.closed_torus_shear(2.0),
                                          rel=1e-12)

    def test_brackets_monte_carlo(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        quad = tc.periodicity_cost_quadrature(s2_spin, np.pi, cost)
        mc = tc.periodicity_cost(s2_spin, np.pi, cost, 100_000, seed=13)
        assert abs(mc.value - quad.value) <= 3 * mc.std_error

    def test_rejects_higher_dimensions(self, s2xs2):
        cost = tc.make_cost("chordal-sq", s2xs2.chart)
        with pytest.raises(ValidationError):
            tc.periodicity_cost_quadrature(s2xs2, (1.0, 1.0), cost)


class TestContinuityProbe:
    def test_single_entry_matches_pointwise_estimate(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        probe = tc.cost_continuity_probe(s2_spin, cost, [(1.0,)], 5000, seed=3)
        direct = tc.periodicity_cost(s2_spin, 1.0, cost, 5000, seed=3)
        assert probe[0] == direct

    def test_zero_path(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        probe = tc.cost_continuity_probe(s2_spin, cost, [(0.0,)], 1000, seed=3)
        assert probe[0].value == 0.0

    def test_modulus_of_continuity(self, s2_spin):
        # |C(t) - C(t')| <= (16*pi/3)|cos t - cos t'| + tiny, with shared samples
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        path = [(0.0,), (0.01,), (0.02,), (0.5,), (1.0,)]
        ests = tc.cost_continuity_probe(s2_spin, cost, path, 20_000, seed=4)
        for (ta,), (tb,), ea, eb in zip(path, path[1:], ests, ests[1:]):
            bound = (16 * np.pi / 3) * abs(np.cos(ta) - np.cos(tb)) + 1e-9
            assert abs(ea.value - eb.value) <= bound

    def test_empty_path_rejected(self, s2_spin):
        cost = tc.make_cost("chordal-sq", s2_spin.chart)
        with pytest.raises(ValidationError):
            tc.cost_continuity_probe(s2_spin, cost, [], 1000, seed=1)


class TestOracleQuadratures:
    def test_bessel_quadrature_matches_scipy(self):
        from scipy.special import j0

        for t in (0.0, 1.0, 2.0, np.pi, TWO_PI, 7.0, 4 * np.pi):
            assert tc.bessel_j0_quadrature(t) == pytest.approx(j0(t), abs=1e-12)

    def test_perturbed_quadrature_matches_scipy_quad(self):
        for t in (1.0, np.pi, TWO_PI):
            mine = sphere_spin_perturbed_cost(t, 0.1)
            ref = oracles.quad_perturbed_spin(t, 0.1)
            assert mine == pytest.approx(ref, rel=1e-10)
