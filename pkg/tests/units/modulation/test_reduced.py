import math
import numpy as np
import pytest
from conftest import synthetic_coefficients
from benney_luke.common.error import BLError, Code
from benney_luke.modulation.reduced import (TRACK_COLUMNS, ModulationTrack, integrate_reduced, linear_symbol,
                                            quadratic_terms, reduced_rhs)
from benney_luke.modulation.ygrid import ReducedState, y_grid

ETA0 = 0.25


@pytest.fixture(scope="module")
def decay_track():
    """A small Gaussian speed pulse marched to t = 1e4 on a wide box."""
    coeffs = synthetic_coefficients()
    grid = y_grid(8000.0, 1024)
    init = ReducedState(grid=grid, gamma=np.zeros(grid.n), speed=1e-3 * np.exp(-(grid.y / 8.0) ** 2))
    return integrate_reduced(init, coeffs, t_final=1e4, dt=2.0, record_every=10, eta0=ETA0)


def _late(track, name, start=100.0):
    t = track.times
    keep = t >= start
    return t[keep], np.asarray(getattr(track, name))[keep]


class TestLinearSymbol:
    """
    UNIT TESTS: A(c0, eta) on the band

    PURPOSE: Check the eigenvalues against -lambda2 eta^2 +/- i lambda1 eta
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_eigenvalues(self, synthetic_coeffs):
        grid = y_grid(2000.0, 256)
        symbol = linear_symbol(synthetic_coeffs, grid, ETA0)
        for i in (1, 3, 10, 30):
            eta = grid.eta[i]
            values = np.linalg.eigvals(symbol[..., i])
            assert np.allclose(values.real, -synthetic_coeffs.lambda2 * eta ** 2, rtol=1e-10)
            assert abs(abs(values.imag[0]) / (synthetic_coeffs.lambda1 * eta) - 1.0) <= eta ** 2

    @pytest.mark.white_box
    def test_outside_band_is_transport_only(self, synthetic_coeffs):
        grid = y_grid(100.0, 128)
        symbol = linear_symbol(synthetic_coeffs, grid, ETA0)
        outside = np.abs(grid.eta) > ETA0
        np.testing.assert_array_equal(symbol[0, 0, outside], 0.0)
        np.testing.assert_array_equal(symbol[0, 1, outside], 1.0)


class TestReducedRhs:
    """
    UNIT TESTS: rate of the reduced system

    PURPOSE: Verify trivial states and the quadratic terms of both forms
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_zero_state(self, synthetic_coeffs):
        grid = y_grid(400.0, 128)
        rate = reduced_rhs(ReducedState.zeros(grid), synthetic_coeffs, ETA0)
        assert rate.sup() == 0.0

    @pytest.mark.black_box
    def test_constant_speed_moves_gamma(self, synthetic_coeffs):
        grid = y_grid(400.0, 128)
        rate = reduced_rhs(ReducedState(grid=grid, gamma=np.zeros(128), speed=np.full(128, 0.02)),
                           synthetic_coeffs, ETA0)
        np.testing.assert_allclose(rate.gamma, 0.02, rtol=1e-12)
        np.testing.assert_allclose(rate.speed, 0.0, atol=1e-15)

    @pytest.mark.black_box
    def test_gamma_b_form_has_p1_term(self, synthetic_coeffs):
        grid = y_grid(400.0, 128)
        b = np.full(128, 0.1)
        rate = reduced_rhs(ReducedState(grid=grid, gamma=np.zeros(128), speed=b, form="gamma_b"), synthetic_coeffs,
                           ETA0)
        assert rate.form == "gamma_b"
        np.testing.assert_allclose(rate.gamma, 0.1 + synthetic_coeffs.p1 * 0.01, rtol=1e-12)

    @pytest.mark.white_box
    def test_quadratic_terms_are_band_limited(self, synthetic_coeffs):
        grid = y_grid(200.0, 256)
        gamma = grid.project(np.sin(2 * np.pi * 5 * grid.y / 200.0), ETA0)
        terms = quadratic_terms(np.stack([gamma, gamma]), grid, synthetic_coeffs, "gamma_c", ETA0)
        spectrum = np.abs(grid.fft(terms))
        assert np.max(spectrum[:, ~grid.band_mask(ETA0)]) <= 1e-12

    @pytest.mark.black_box
    def test_band_too_wide(self, synthetic_coeffs):
        grid = y_grid(100.0, 16)
        with pytest.raises(BLError) as err:
            reduced_rhs(ReducedState.zeros(grid), synthetic_coeffs, 0.5)
        assert err.value.code == Code.E0504


class TestModulationTrack:
    """
    UNIT TESTS: recorded (gamma, c~) samples and their norms

    PURPOSE: Check ordering, norm series and the frame export
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_times_must_increase(self):
        track = ModulationTrack(grid=y_grid(10.0, 8), c0=1.05)
        track.record(1.0, np.zeros(8), np.zeros(8))
        with pytest.raises(BLError) as err:
            track.record(1.0, np.zeros(8), np.zeros(8))
        assert err.value.code == Code.E0503

    @pytest.mark.white_box
    def test_frame(self):
        grid = y_grid(2 * np.pi, 16)
        track = ModulationTrack(grid=grid, c0=1.05)
        track.record(0.0, np.sin(grid.y), np.cos(grid.y), mismatch=0.5)
        frame = track.to_frame()
        assert list(frame.columns) == TRACK_COLUMNS
        assert frame.loc[0, "c_norm"] == pytest.approx(np.sqrt(np.pi))
        assert frame.loc[0, "gamma_y_norm"] == pytest.approx(np.sqrt(np.pi))
        assert frame.loc[0, "burgers_mismatch"] == 0.5
        assert track.b_array() is None
        assert track.gamma_array().shape == (1, 16)


class TestIntegrateReduced:
    """
    INTEGRATION TESTS: marching the reduced system

    PURPOSE: Verify guards, trivial runs and the diffusive decay rates
    TESTING TYPE: Hybrid integration testing
    """

    @pytest.mark.hybrid
    def test_zero_initial_data(self, synthetic_coeffs):
        grid = y_grid(400.0, 128)
        track = integrate_reduced(ReducedState.zeros(grid), synthetic_coeffs, 10.0, 1.0, eta0=ETA0)
        assert track.t[0] == 0.0 and track.t[-1] == 10.0
        assert max(track.gamma_sup) == 0.0 and max(track.c_norm) == 0.0
        assert math.isnan(track.burgers_mismatch[0])

    @pytest.mark.hybrid
    def test_constant_speed_shifts_linearly(self, synthetic_coeffs):
        grid = y_grid(400.0, 128)
        init = ReducedState(grid=grid, gamma=np.zeros(128), speed=np.full(128, 0.01))
        track = integrate_reduced(init, synthetic_coeffs, 5.0, 0.5, record_every=2, eta0=ETA0, mismatch=False)
        np.testing.assert_allclose(track.gamma[-1], 0.05, rtol=1e-12)
        np.testing.assert_allclose(track.c_tilde[-1], 0.01, rtol=1e-12)

    @pytest.mark.hybrid
    @pytest.mark.parametrize("t_final, dt, every", [(1.0, 0.0, 1), (1.0, 0.3, 1), (1.0, 0.5, 0)])
    def test_bad_stepping(self, synthetic_coeffs, t_final, dt, every):
        grid = y_grid(100.0, 32)
        with pytest.raises(BLError) as err:
            integrate_reduced(ReducedState.zeros(grid), synthetic_coeffs, t_final, dt, record_every=every, eta0=ETA0)
        assert err.value.code == Code.E0304

    @pytest.mark.hybrid
    def test_blowup_detected(self):
        # negative diagonal diffusion makes the band modes grow
        coeffs = synthetic_coefficients(a=[[-2.0, 0.0, 0.0, 0.0, 0.0], [0.09, -2.0, 0.0, 0.0, 0.0]])
        grid = y_grid(400.0, 128)
        init = ReducedState(grid=grid, gamma=np.zeros(128), speed=1e-3 * np.cos(2 * np.pi * 10 * grid.y / 400.0))
        with pytest.raises(BLError) as err:
            integrate_reduced(init, coeffs, 400.0, 1.0, eta0=ETA0, mismatch=False)
        assert err.value.code == Code.E0503

    @pytest.mark.hybrid
    def test_speed_decay_rate(self, decay_track):
        t, values = _late(decay_track, "c_norm")
        slope = np.polyfit(np.log(t), np.log(values), 1)[0]
        assert slope == pytest.approx(-0.25, abs=0.05), f"||c~||_2 slope {slope}"

    @pytest.mark.hybrid
    def test_speed_gradient_decay_rate(self, decay_track):
        t, values = _late(decay_track, "cy_norm")
        slope = np.polyfit(np.log(t), np.log(values), 1)[0]
        assert slope == pytest.approx(-0.75, abs=0.1), f"||c~_y||_2 slope {slope}"

    @pytest.mark.hybrid
    def test_phase_stays_bounded(self, decay_track):
        _, sups = _late(decay_track, "gamma_sup")
        assert np.max(sups) <= 1.5 * np.min(sups), "sup |gamma| must settle on a plateau"

    @pytest.mark.hybrid
    def test_burgers_mismatch_shrinks(self, decay_track):
        t, mismatch = _late(decay_track, "burgers_mismatch")
        early = mismatch[np.argmin(np.abs(t - 1000.0))]
        assert np.isfinite(mismatch[-1])
        assert mismatch[-1] < early, f"mismatch {early} at t=1000, {mismatch[-1]} at the end"
