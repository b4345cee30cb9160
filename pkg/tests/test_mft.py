import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mehlerfock.mft import (
    DEFAULT_RADIAL_GRID,
    DEFAULT_SPECTRAL_GRID,
    GridMismatchError,
    RadialFunction,
    RadialGrid,
    SpectralGrid,
    Spectrum,
    TruncationWarning,
    conical_matrix,
    heat_multiplier,
    mft_forward,
    mft_inverse,
    parseval_distance,
    parseval_inner,
    radial_inner,
    relative_l2_error,
)

from conftest import mp_kernel_transform


def power_cosh(s, grid=DEFAULT_RADIAL_GRID):
    return RadialFunction.from_callable(lambda t: np.cosh(t) ** (-s), grid)


@pytest.fixture(scope="module")
def spectra():
    return {s: mft_forward(power_cosh(s)) for s in (2.0, 3.0, 4.0)}


class TestGrids:
    def test_nodes(self):
        g = RadialGrid(12.0, 600)
        assert g.nodes[0] == 0 and g.nodes[-1] == 12.0 and len(g.nodes) == 600
        assert g.weights.sum() == pytest.approx(12.0)

    @pytest.mark.parametrize("bad", [(0.0, 100), (5.0, 31), (5.0, 40.5)])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            RadialGrid(*bad)
        with pytest.raises(ValueError):
            SpectralGrid(*bad)

    def test_value_length_checked(self):
        with pytest.raises(ValueError):
            RadialFunction(DEFAULT_RADIAL_GRID, np.zeros(10))
        with pytest.raises(ValueError):
            Spectrum(DEFAULT_SPECTRAL_GRID, np.full(400, np.nan))

    def test_matrix_cached_and_read_only(self):
        a = conical_matrix(DEFAULT_SPECTRAL_GRID, DEFAULT_RADIAL_GRID)
        b = conical_matrix(DEFAULT_SPECTRAL_GRID, DEFAULT_RADIAL_GRID)
        assert a is b and not a.flags.writeable


class TestForward:
    def test_zero(self):
        c = mft_forward(RadialFunction(DEFAULT_RADIAL_GRID, np.zeros(600)))
        assert np.all(c.values == 0)

    def test_linearity(self, spectra):
        f = power_cosh(2.0)
        np.testing.assert_array_equal(mft_forward(2.0 * f).values, 2.0 * spectra[2.0].values)

    @pytest.mark.parametrize("kappa_index", [0, 10, 50, 150, 399])
    def test_against_adaptive_quadrature(self, spectra, kappa_index):
        kappa = DEFAULT_SPECTRAL_GRID.nodes[kappa_index]
        ref = mp_kernel_transform(2.0, kappa)
        assert abs(spectra[2.0].values[kappa_index] - ref) < 1e-6

    def test_truncation_warning(self):
        slow = RadialFunction.from_callable(lambda t: np.exp(-0.5 * t))
        with pytest.warns(TruncationWarning):
            mft_forward(slow)

    def test_no_warning_for_decayed_input(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            mft_forward(power_cosh(2.0))


class TestInverse:
    def test_zero(self):
        f = mft_inverse(Spectrum.zeros())
        assert np.all(f.values == 0)

    @pytest.mark.parametrize("s", [2.0, 3.0, 4.0])
    def test_round_trip(self, spectra, s):
        back = mft_inverse(spectra[s])
        assert relative_l2_error(back, power_cosh(s)) < 1e-3

    def test_truncated_spectrum_warns(self):
        flat = Spectrum(DEFAULT_SPECTRAL_GRID, np.ones(400))
        with pytest.warns(TruncationWarning):
            mft_inverse(flat)


class TestParseval:
    def test_self_inner_product(self, spectra):
        assert abs(parseval_inner(spectra[2.0], spectra[2.0]) - 1 / 3) < 1e-3 / 3

    @pytest.mark.parametrize("pair", [(2.0, 3.0), (2.0, 4.0), (3.0, 4.0)])
    def test_cross_inner_products(self, spectra, pair):
        """int_1^inf x^(-s1-s2) dx = 1 / (s1 + s2 - 1)."""
        s1, s2 = pair
        exact = 1.0 / (s1 + s2 - 1)
        assert abs(parseval_inner(spectra[s1], spectra[s2]) - exact) < 1e-3 * exact

    def test_matches_radial_inner(self, spectra):
        r = radial_inner(power_cosh(2.0), power_cosh(3.0))
        assert abs(parseval_inner(spectra[2.0], spectra[3.0]) - r) < 1e-3 * r

    def test_zero_and_bilinear(self, spectra):
        c1, c2, c3 = spectra[2.0], spectra[3.0], spectra[4.0]
        assert parseval_inner(c1, Spectrum.zeros()) == 0.0
        lhs = parseval_inner(2.0 * c1 + (-3.0) * c2, c3)
        rhs = 2.0 * parseval_inner(c1, c3) - 3.0 * parseval_inner(c2, c3)
        assert abs(lhs - rhs) < 1e-15

    def test_distance_basics(self, spectra):
        c = spectra[2.0]
        assert parseval_distance(c, c) == 0.0
        assert parseval_distance(c, Spectrum.zeros()) == pytest.approx(math.sqrt(parseval_inner(c, c)), rel=1e-15)

    def test_triangle_inequality(self, rng):
        g = SpectralGrid(5.0, 64)
        for _ in range(100):
            a, b, c = (Spectrum(g, rng.normal(size=64)) for _ in range(3))
            assert parseval_distance(a, c) <= parseval_distance(a, b) + parseval_distance(b, c) + 1e-12

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            parseval_inner(Spectrum.zeros(), Spectrum.zeros(SpectralGrid(10.0, 400)))

    def test_grid_refinement_stability(self):
        fine_r, fine_s = RadialGrid(12.0, 1199), SpectralGrid(20.0, 799)
        coarse = mft_forward(power_cosh(2.0))
        fine = mft_forward(power_cosh(2.0, fine_r), fine_s)
        a, b = parseval_inner(coarse, coarse), parseval_inner(fine, fine)
        assert abs(a - b) < 1e-4 * b


class TestHeat:
    def test_identity_at_zero(self, spectra):
        np.testing.assert_array_equal(heat_multiplier(spectra[2.0], 0.0).values, spectra[2.0].values)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0))
    @settings(max_examples=50, deadline=None)
    def test_semigroup(self, t1, t2):
        c = Spectrum(DEFAULT_SPECTRAL_GRID, np.cosh(DEFAULT_SPECTRAL_GRID.nodes) ** -1)
        two = heat_multiplier(heat_multiplier(c, t1), t2).values
        one = heat_multiplier(c, t1 + t2).values
        np.testing.assert_allclose(two, one, rtol=1e-12, atol=1e-300)

    def test_long_time_bound(self, spectra):
        c = spectra[2.0]
        assert np.all(np.abs(heat_multiplier(c, 50.0).values) <= math.exp(-12.5) * np.abs(c.values).max())

    def test_negative_time(self, spectra):
        with pytest.raises(ValueError):
            heat_multiplier(spectra[2.0], -0.1)

    @pytest.mark.parametrize("s", [2.0, 3.0, 4.0])
    def test_sup_norm_contraction(self, spectra, s):
        sup = [np.abs(mft_inverse(heat_multiplier(spectra[s], t)).values).max() for t in (0, 0.1, 0.5, 1, 2, 5)]
        assert all(b <= a + 1e-6 for a, b in zip(sup, sup[1:]))
