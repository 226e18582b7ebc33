import numpy as np
import pytest
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import PerturbationSpec
from benney_luke.lab.scenarios import band_profile, build_perturbation, localized_bump, resonant_mode
from benney_luke.spectral.grid import make_grid


@pytest.fixture
def wide_y_grid():
    """Box long in y so that several modes fall inside the band."""
    return make_grid(60.0, 200.0, 64, 64)


class TestLocalizedBump:
    """
    UNIT TESTS: polynomially localized potential bump

    PURPOSE: Check placement, amplitude and the zero second component
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_peak_and_second_component(self, soliton_grid, params):
        spec = PerturbationSpec(kind="localized_bump", epsilon=1e-3, width_x=4.0, width_y=20.0, offset=15.0)
        bump = localized_bump(soliton_grid, params, 1.5, spec)
        iy, ix = np.unravel_index(np.argmax(bump.phi1.values), soliton_grid.shape)
        assert soliton_grid.x[ix] == pytest.approx(15.0, abs=soliton_grid.dx)
        assert soliton_grid.y[iy] == pytest.approx(0.0, abs=soliton_grid.dy)
        assert bump.phi1.max_abs() == pytest.approx(1e-3, rel=1e-2)
        assert bump.phi2.max_abs() == 0.0
        assert bump.background is None

    @pytest.mark.black_box
    def test_origin_shifts_the_bump(self, soliton_grid, params):
        spec = PerturbationSpec(offset=5.0)
        bump = localized_bump(soliton_grid, params, 1.5, spec, origin=-10.0)
        ix = np.argmax(bump.phi1.values.max(axis=0))
        assert soliton_grid.x[ix] == pytest.approx(-5.0, abs=soliton_grid.dx)


class TestResonantMode:
    """
    UNIT TESTS: band-limited change of speed along the crest

    PURPOSE: Verify the eta0 guard, periodicity in x, linearity in eps and the band limit
    TESTING TYPE: Hybrid unit testing
    """

    @pytest.mark.white_box
    def test_needs_eta0(self, soliton_grid, params):
        with pytest.raises(BLError) as err:
            resonant_mode(soliton_grid, params, 1.5, PerturbationSpec(kind="resonant_mode"))
        assert err.value.code == Code.E0504

    @pytest.mark.black_box
    def test_periodic_in_x(self, soliton_grid, params):
        mode = resonant_mode(soliton_grid, params, 1.5, PerturbationSpec(kind="resonant_mode", epsilon=1.0),
                             eta0=0.3)
        first = mode.phi1.values
        seam = np.max(np.abs(first[:, 0] - first[:, -1]))
        assert seam <= 1e-6 * np.max(np.abs(first)), f"seam jump {seam}"
        assert np.max(np.abs(mode.phi2.values[:, [0, -1]])) <= 1e-6 * mode.phi2.max_abs()

    @pytest.mark.black_box
    def test_linear_in_epsilon(self, soliton_grid, params):
        small = resonant_mode(soliton_grid, params, 1.5, PerturbationSpec(kind="resonant_mode", epsilon=1e-3),
                              eta0=0.3)
        large = resonant_mode(soliton_grid, params, 1.5, PerturbationSpec(kind="resonant_mode", epsilon=2e-3),
                              eta0=0.3)
        np.testing.assert_allclose(large.phi1.values, 2.0 * small.phi1.values, rtol=1e-12, atol=0.0)
        np.testing.assert_allclose(large.phi2.values, 2.0 * small.phi2.values, rtol=1e-12, atol=0.0)

    @pytest.mark.black_box
    def test_thin_box_keeps_mean_mode(self, soliton_grid):
        g = band_profile(soliton_grid, 0.3)
        np.testing.assert_allclose(g, 1.0 / soliton_grid.ly, rtol=1e-12)

    @pytest.mark.black_box
    def test_band_limited_and_even(self, wide_y_grid):
        eta0 = 0.5
        g = band_profile(wide_y_grid, eta0)
        spectrum = np.abs(np.fft.fft(g))
        outside = np.abs(wide_y_grid.eta) >= 0.5 * eta0
        assert np.max(spectrum[outside]) <= 1e-12 * np.max(spectrum), "modes beyond eta0/2 must vanish"
        mid = wide_y_grid.ny // 2
        np.testing.assert_allclose(g[mid + 1:], g[mid - 1:0:-1], rtol=0.0, atol=1e-14)
        assert np.argmax(g) == mid, "the profile peaks on the crest centre line"


class TestBuildPerturbation:
    """
    UNIT TESTS: scenario dispatch

    PURPOSE: Check the none scenario and the configured kind reaching its builder
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_none_is_zero(self, soliton_grid, params):
        zero = build_perturbation(soliton_grid, params, 1.5, PerturbationSpec(kind="none"))
        assert zero.phi1.max_abs() == 0.0 and zero.phi2.max_abs() == 0.0

    @pytest.mark.white_box
    def test_dispatch_passes_eta0(self, soliton_grid, params):
        spec = PerturbationSpec(kind="resonant_mode", epsilon=1e-3)
        built = build_perturbation(soliton_grid, params, 1.5, spec, eta0=0.3)
        direct = resonant_mode(soliton_grid, params, 1.5, spec, eta0=0.3)
        np.testing.assert_array_equal(built.phi1.values, direct.phi1.values)

    @pytest.mark.white_box
    def test_unknown_kind(self, soliton_grid, params):
        spec = PerturbationSpec.model_construct(kind="ripple", epsilon=1e-3, width_x=4.0, width_y=20.0,
                                                offset=15.0)
        with pytest.raises(BLError) as err:
            build_perturbation(soliton_grid, params, 1.5, spec)
        assert err.value.code == Code.E0601
