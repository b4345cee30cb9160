import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mehlerfock.conical import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    QuadratureError,
    addition_series,
    conical_p,
    conical_p_grid,
    conical_p_orders,
    gamma_ratio,
    legendre_p,
    recommended_n_theta,
)
from mehlerfock.hypgeo import relative_cosh

from conftest import mp_conical

KAPPAS = [0.0, 0.5, 1.0, 5.0, 20.0]


def _plus_argument(tau_l, tau_0, theta):
    """tau with cosh tau = cosh tl cosh t0 + sinh tl sinh t0 cos theta (geometric law with theta + pi)."""
    return math.acosh(relative_cosh(tau_l, theta + math.pi, tau_0, 0.0))


class TestQuadratureConfig:
    @pytest.mark.parametrize("n", [8, 15, 255, 0])
    def test_rejects_bad_node_counts(self, n):
        with pytest.raises(ValueError):
            QuadratureConfig(n_theta=n)

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(ValueError):
            QuadratureConfig(tolerance=0.0)

    def test_recommended_counts_are_even_and_floored(self):
        assert recommended_n_theta(0.1, 0.1) == 256
        n = recommended_n_theta(20.0, 12.0)
        assert n % 2 == 0 and n > 20 * 12


class TestOrigin:
    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_zonal_is_one(self, kappa):
        assert conical_p(0, kappa, 0.0) == 1.0

    @pytest.mark.parametrize("kappa", KAPPAS)
    @pytest.mark.parametrize("m", [-3, -1, 1, 2, 16])
    def test_nonzonal_vanish(self, m, kappa):
        assert conical_p(m, kappa, 0.0) == 0.0


class TestAgainstOracles:
    def test_reference_value(self):
        """(m=0, kappa=1, tau=1) against mpmath and against direct adaptive quadrature of the integral."""
        val = conical_p(0, 1.0, 1.0)
        oracle = mp_conical(0, 1.0, 1.0)
        assert abs(val - oracle) < 1e-8
        f = lambda th: ((math.sinh(1.0) * math.cos(th) + math.cosh(1.0)) ** complex(-0.5, 1.0)).real
        quad, _ = integrate.quad(f, 0, 2 * math.pi, limit=200, epsabs=1e-13)
        assert abs(val - quad / (2 * math.pi)) < 1e-8

    def test_hypergeometric_near_one(self):
        """P_alpha(x) = 2F1(-alpha, alpha+1; 1; (1-x)/2) for x near 1."""
        tau = 0.05
        a = complex(-0.5, 2.0)
        ref = complex(mp.hyp2f1(-a, a + 1, 1, (1 - mp.cosh(tau)) / 2)).real
        assert abs(conical_p(0, 2.0, tau) - ref) < 1e-12

    def test_grid_entry_matches_oracle(self):
        assert abs(conical_p_grid(2, [1.0], [2.0])[0, 0] - mp_conical(2, 1.0, 2.0)) < 1e-10

    @pytest.mark.parametrize("m", [-16, -8, -2, 0, 1, 4, 8, 16])
    def test_box_against_mpmath(self, m):
        kap = np.array([0.0, 0.5, 2.0, 7.0, 20.0])
        tau = np.array([0.001, 0.05, 0.4, 1.0, 2.5, 5.0, 8.0])
        vals = conical_p_grid(m, kap, tau)
        ref = np.array([[mp_conical(m, k, t) for t in tau] for k in kap])
        np.testing.assert_allclose(vals, ref, rtol=1e-10, atol=1e-300)

    @given(st.integers(-12, 12), st.floats(0.0, 20.0), st.floats(0.0, 8.0))
    @settings(max_examples=40, deadline=None)
    def test_random_points(self, m, kappa, tau):
        val = conical_p(m, kappa, tau)
        ref = mp_conical(m, kappa, tau)
        assert abs(val - ref) <= 1e-9 * max(1.0, abs(ref))

    def test_gamma_ratio_matches_gamma_functions(self):
        for m in (-4, -1, 0, 3, 7):
            a = mp.mpc(-0.5, 1.3)
            ref = complex(mp.gamma(a + m + 1) / mp.gamma(a + 1))
            assert abs(complex(gamma_ratio(m, 1.3)) - ref) < 1e-12 * abs(ref)


class TestGrid:
    def test_single_entry(self):
        np.testing.assert_array_equal(conical_p_grid(0, [0.5], [0.0]), [[1.0]])

    def test_bit_identical_to_scalar_calls(self):
        kap = np.array([0.1, 0.9, 3.0, 11.0])
        tau = np.array([0.0, 0.7, 4.0])
        grid = conical_p_grid(1, kap, tau)
        scalar = np.array([[conical_p(1, k, t) for t in tau] for k in kap])
        np.testing.assert_array_equal(grid, scalar)

    def test_orders_share_integrand(self):
        kap, tau = np.array([0.3, 4.0]), np.array([0.5, 2.0])
        both = conical_p_orders([0, 3], kap, tau)
        np.testing.assert_array_equal(both[1], conical_p_grid(3, kap, tau))


class TestProperties:
    def test_realness_on_box(self):
        """No entry in the box |m|<=16, kappa<=20, tau<=8 leaks more than 1e-9 into the imaginary part."""
        strict = QuadratureConfig(tolerance=1e-9)
        kap = np.linspace(0, 20, 21)
        tau = np.linspace(0, 8, 17)
        conical_p_orders(np.arange(-16, 17, 4), kap, tau, strict)

    @pytest.mark.parametrize("m", [0, 1, 5])
    def test_kappa_sign_symmetry(self, m):
        """The integral with degree -1/2 - i kappa gives the same real function."""
        kap = np.array([0.4, 3.0, 12.0])
        tau = np.array([0.3, 1.5, 6.0])
        neg = legendre_p(m, -0.5 - 1j * kap, tau)
        pos = conical_p_grid(m, kap, tau)
        np.testing.assert_allclose(neg.real, pos, rtol=1e-9, atol=1e-12)
        assert np.all(np.abs(neg.imag) < 1e-9 * np.maximum(1, np.abs(pos)))

    def test_negative_kappa_canonicalized(self):
        assert conical_p(2, -1.5, 0.8) == conical_p(2, 1.5, 0.8)

    def test_node_doubling(self):
        kap = np.linspace(0, 20, 5)
        tau = np.linspace(0.01, 8, 5)
        a = conical_p_orders(range(0, 9, 2), kap, tau)
        b = conical_p_orders(range(0, 9, 2), kap, tau, DEFAULT_QUADRATURE.with_n_theta(512))
        assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) < 1e-10

    @pytest.mark.parametrize("kappa", [0.5, 2.0, 10.0])
    def test_decay_bounded(self, kappa):
        tau = np.linspace(0, 12, 200)
        vals = conical_p_grid(0, [kappa], tau, DEFAULT_QUADRATURE.with_n_theta(recommended_n_theta(10, 12)))[0]
        scaled = np.abs(vals) * np.exp(tau / 2)
        assert scaled.max() < 3.0
        assert scaled[100:].max() <= 1.5 * scaled[:100].max()

    def test_decay_at_kappa_zero_is_at_most_linear(self):
        """At kappa = 0 the function behaves like (a + b tau) e^{-tau/2}."""
        tau = np.linspace(0, 12, 100)
        vals = conical_p_grid(0, [0.0], tau)[0]
        assert np.all(np.abs(vals) * np.exp(tau / 2) <= 1.0 + tau)

    def test_order_sign_relation(self):
        """P^{-m} = [Gamma(alpha-m+1) / Gamma(alpha+m+1)] P^m."""
        kap, tau = np.array([0.3, 2.5]), np.array([0.4, 2.0])
        for m in (1, 3):
            ratio = (gamma_ratio(-m, kap) / gamma_ratio(m, kap)).real
            np.testing.assert_allclose(conical_p_grid(-m, kap, tau), ratio[:, None] * conical_p_grid(m, kap, tau),
                                       rtol=1e-11)

    def test_under_resolution_is_signalled(self):
        with pytest.raises(QuadratureError):
            conical_p(0, 20.0, 12.0, QuadratureConfig(n_theta=64))


class TestAdditionSeries:
    def test_origin_sample(self):
        assert addition_series(0.7, 0.0, 1.3, 0.9, 10) == pytest.approx(conical_p(0, 0.7, 1.3), abs=1e-14)

    def test_reference_point(self):
        """The series sums to the zonal function at the '+ cos' argument."""
        s = addition_series(0.8, 0.7, 1.1, 0.4, 40)
        direct = conical_p(0, 0.8, _plus_argument(0.7, 1.1, 0.4))
        assert abs(s - direct) < 1e-6

    def test_geometric_argument_needs_shift(self):
        """Against the geometric relative argument the series corresponds to theta + pi."""
        s = addition_series(0.8, 0.7, 1.1, 0.4 + math.pi, 40)
        direct = conical_p(0, 0.8, math.acosh(relative_cosh(0.7, 0.4, 1.1, 0.0)))
        assert abs(s - direct) < 1e-6

    def test_same_radius_antipodal_limit(self):
        """theta = pi and tau_l = tau_0 gives argument 1, so the sum is 1."""
        assert abs(addition_series(1.2, 0.9, 0.9, math.pi, 60) - 1.0) < 1e-6

    def test_not_converged(self):
        with pytest.raises(QuadratureError):
            addition_series(1.0, 2.0, 2.0, 0.3, 2)

    def test_negative_mmax(self):
        with pytest.raises(ValueError):
            addition_series(1.0, 0.5, 0.5, 0.0, -1)
