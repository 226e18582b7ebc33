import numpy as np
import pytest
from benney_luke.common.error import BLError, Code
from benney_luke.lab.fitting import DecayFit, fit_decay_exponent, select_window

T = np.logspace(0, 4, 200)


class TestFitDecayExponent:
    """
    UNIT TESTS: log-log slope with a bootstrap interval

    PURPOSE: Recover known exponents and reject unusable windows
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_exact_power_law(self):
        fit = fit_decay_exponent(T, T ** -0.25)
        assert abs(fit.slope + 0.25) <= 1e-12, f"slope {fit.slope}"
        assert abs(fit.intercept) <= 1e-11
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.ci[0] == pytest.approx(-0.25, abs=1e-12) and fit.ci[1] == pytest.approx(-0.25, abs=1e-12)

    @pytest.mark.black_box
    def test_oscillating_power_law(self):
        values = 3.0 * T ** -0.75 * (1.0 + 0.1 * np.sin(np.log(T)))
        fit = fit_decay_exponent(T, values)
        assert fit.slope == pytest.approx(-0.75, abs=0.05), f"slope {fit.slope}"
        assert fit.ci[0] <= fit.slope <= fit.ci[1]

    @pytest.mark.black_box
    def test_constant_series(self):
        fit = fit_decay_exponent(T, np.full(T.size, 0.3))
        assert abs(fit.slope) <= 1e-12

    @pytest.mark.black_box
    def test_window_selects_samples(self):
        t = np.arange(1.0, 101.0)
        fit = fit_decay_exponent(t, t ** -0.5, window=(10.0, 50.0))
        assert fit.samples == 41
        assert fit.window == (10.0, 50.0)

    @pytest.mark.black_box
    def test_seeded_interval(self, rng):
        values = T ** -0.5 * np.exp(0.05 * rng.normal(size=T.size))
        first = fit_decay_exponent(T, values, seed=7)
        second = fit_decay_exponent(T, values, seed=7)
        assert first.ci == second.ci, "the same seed must give the same interval"
        assert first.ci[0] < first.slope < first.ci[1]

    @pytest.mark.black_box
    def test_no_resampling(self):
        fit = fit_decay_exponent(T, T ** -1.0, resamples=0)
        assert fit.ci == (fit.slope, fit.slope)

    @pytest.mark.black_box
    def test_report(self):
        report = fit_decay_exponent(T, T ** -0.25).to_report()
        assert set(report) == {"slope", "intercept", "r_squared", "window", "ci", "samples", "confidence"}
        assert DecayFit(**report).samples == T.size


class TestFitErrors:
    """
    UNIT TESTS: guards of the decay fit

    PURPOSE: Verify the sample count, positivity and window checks
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_too_few_samples(self):
        t = np.arange(1.0, 20.0)
        with pytest.raises(BLError) as err:
            fit_decay_exponent(t, 1.0 / t)
        assert err.value.code == Code.E0701

    @pytest.mark.white_box
    @pytest.mark.parametrize("bad", [0.0, -1e-3, float("nan")])
    def test_non_positive_values(self, bad):
        values = T ** -0.25
        values[50] = bad
        with pytest.raises(BLError) as err:
            fit_decay_exponent(T, values)
        assert err.value.code == Code.E0702

    @pytest.mark.white_box
    def test_time_zero_rejected(self):
        t = np.linspace(0.0, 10.0, 30)
        with pytest.raises(BLError) as err:
            fit_decay_exponent(t, np.ones(30))
        assert err.value.code == Code.E0702

    @pytest.mark.white_box
    @pytest.mark.parametrize("window", [(0.5, 10.0), (10.0, 2e4), (50.0, 10.0)])
    def test_window_outside_data(self, window):
        with pytest.raises(BLError) as err:
            select_window(T, window)
        assert err.value.code == Code.E0703

    @pytest.mark.white_box
    def test_shape_mismatch(self):
        with pytest.raises(BLError) as err:
            fit_decay_exponent(T, T[:-1])
        assert err.value.code == Code.E0703
