import numpy as np
import pytest
from benney_luke.common.error import BLError, Code
from benney_luke.modulation.cutoffs import band_indicator, chi, chi1, chi2, cutoff, smooth_step
from benney_luke.modulation.ygrid import ReducedState, YGrid, y_grid


class TestCutoffs:
    """
    UNIT TESTS: smooth Fourier cutoffs chi, chi1, chi2

    PURPOSE: Check plateaus, supports, monotonicity and the partition chi1 + chi2 = 1
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_smooth_step_ends(self):
        s = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
        np.testing.assert_allclose(smooth_step(s), [0.0, 0.0, 0.5, 1.0, 1.0], atol=1e-15)

    @pytest.mark.white_box
    def test_smooth_step_monotone(self):
        values = smooth_step(np.linspace(-0.5, 1.5, 401))
        assert np.all(np.diff(values) >= 0.0), "the step must not decrease"

    @pytest.mark.white_box
    @pytest.mark.parametrize("eta0", [0.1, 0.5])
    def test_plateaus_and_supports(self, eta0):
        eta = np.linspace(-eta0, eta0, 801)
        inner = np.abs(eta) <= 0.25 * eta0
        assert np.all(chi(eta, eta0)[inner] == 1.0)
        assert np.all(chi(eta, eta0)[np.abs(eta) >= 0.5 * eta0] == 0.0)
        assert np.all(chi1(eta, eta0)[np.abs(eta) <= 0.5 * eta0] == 1.0)
        assert np.all(chi1(eta, eta0)[np.abs(eta) >= 0.75 * eta0] == 0.0)
        np.testing.assert_allclose(chi1(eta, eta0) + chi2(eta, eta0), 1.0, atol=0.0)

    @pytest.mark.white_box
    def test_even(self):
        eta = np.linspace(0.0, 1.0, 51)
        np.testing.assert_array_equal(chi1(eta, 0.8), chi1(-eta, 0.8))

    @pytest.mark.black_box
    def test_bad_interval(self):
        with pytest.raises(BLError) as err:
            cutoff(np.zeros(3), 0.5, 0.5)
        assert err.value.code == Code.E0504

    @pytest.mark.black_box
    def test_band_indicator_is_sharp(self):
        np.testing.assert_array_equal(band_indicator([-0.3, -0.2, 0.0, 0.2, 0.21], 0.2), [0, 1, 1, 1, 0])


class TestYGrid:
    """
    UNIT TESTS: periodic transverse grid

    PURPOSE: Validate sampling, spectral derivative, band projection and guards
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_sampling(self):
        grid = y_grid(20.0, 16)
        assert grid.dy == pytest.approx(1.25)
        assert grid.y[0] == pytest.approx(-10.0)
        assert grid.y.size == 16

    @pytest.mark.black_box
    @pytest.mark.parametrize("n, length", [(7, 10.0), (6, 10.0), (16, -1.0), (16, float("inf"))])
    def test_rejected(self, n, length):
        with pytest.raises(BLError) as err:
            YGrid(length=length, n=n)
        assert err.value.code == Code.E0101

    @pytest.mark.black_box
    def test_derivative_of_low_mode(self):
        grid = y_grid(2 * np.pi, 32)
        np.testing.assert_allclose(grid.derivative(np.sin(3 * grid.y)), 3 * np.cos(3 * grid.y), atol=1e-12)
        np.testing.assert_allclose(grid.derivative(np.sin(3 * grid.y), order=2), -9 * np.sin(3 * grid.y), atol=1e-11)

    @pytest.mark.black_box
    def test_projection_drops_high_modes(self):
        grid = y_grid(2 * np.pi, 32)
        values = np.cos(grid.y) + np.cos(5 * grid.y)
        np.testing.assert_allclose(grid.project(values, 2.0), np.cos(grid.y), atol=1e-13)

    @pytest.mark.black_box
    def test_band_above_dealias_limit(self):
        grid = y_grid(2 * np.pi, 16)
        grid.check_band(5.0)
        with pytest.raises(BLError) as err:
            grid.check_band(6.0)
        assert err.value.code == Code.E0504

    @pytest.mark.black_box
    def test_norm_and_integral(self):
        grid = y_grid(2 * np.pi, 64)
        assert grid.integrate(np.cos(grid.y) ** 2) == pytest.approx(np.pi, rel=1e-12)
        assert grid.norm(np.cos(grid.y)) == pytest.approx(np.sqrt(np.pi), rel=1e-12)


class TestReducedState:
    """
    UNIT TESTS: the (gamma, c~) pair on a YGrid

    PURPOSE: Check shape and realness guards and the stacked round trip
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_wrong_shape(self):
        grid = y_grid(10.0, 8)
        with pytest.raises(BLError) as err:
            ReducedState(grid=grid, gamma=np.zeros(9), speed=np.zeros(8))
        assert err.value.code == Code.E0103

    @pytest.mark.white_box
    def test_complex_rejected(self):
        grid = y_grid(10.0, 8)
        with pytest.raises(BLError) as err:
            ReducedState(grid=grid, gamma=np.zeros(8, dtype=complex), speed=np.zeros(8))
        assert err.value.code == Code.E0103

    @pytest.mark.white_box
    def test_stacked(self):
        grid = y_grid(10.0, 8)
        state = ReducedState.from_stacked(grid, np.stack([np.arange(8.0), -np.arange(8.0)]), form="gamma_b")
        assert state.form == "gamma_b"
        assert state.sup() == 7.0
        np.testing.assert_array_equal(state.stacked()[1], -np.arange(8.0))
