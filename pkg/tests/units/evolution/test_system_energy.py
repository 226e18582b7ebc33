import numpy as np
import pytest
from conftest import low_mode_field
from benney_luke.common.error import BLError
from benney_luke.evolution.dispersion import dispersion_check, group_speed
from benney_luke.evolution.energy import (
    energy_density_flux, energy_total, flux_symbol_check, localized_energy, virial_weighted_energy,
    weighted_initial_size,
)
from benney_luke.evolution.system import BLSystem, linear_symbol, rhs_bl
from benney_luke.soliton.line_wave import line_wave_field
from benney_luke.spectral.fields import FieldPair
from benney_luke.spectral.grid import make_grid
from benney_luke.spectral.multipliers import dx, omega_squared


class TestRightHandSide:
    """
    UNIT TESTS: rhs_bl and the linear block

    PURPOSE: Check the first-order system on the zero state, plane waves and the exact soliton
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_zero_state(self, params, unit_grid):
        rate = rhs_bl(FieldPair.zeros(unit_grid), params)
        assert rate.phi1.max_abs() == 0.0 and rate.phi2.max_abs() == 0.0

    @pytest.mark.black_box
    def test_soliton_is_stationary_in_moving_frame(self, params, soliton_grid, fast_profile):
        state = line_wave_field(soliton_grid, fast_profile)
        rate = rhs_bl(state, params)
        c = fast_profile.c
        shift1 = c * (dx(state.phi1).values + state.background_values(1))
        shift2 = c * dx(state.phi2).values
        assert np.max(np.abs(rate.phi1.values + shift1)) <= 1e-8, "phi1 rate should cancel c d_x phi1"
        assert np.max(np.abs(rate.phi2.values + shift2)) <= 1e-8, "phi2 rate should cancel c d_x phi2"

    @pytest.mark.black_box
    def test_linear_part_on_plane_wave(self, params, unit_grid):
        xx, yy = unit_grid.mesh()
        state = FieldPair.from_arrays(unit_grid, np.cos(xx + 2 * yy), np.sin(xx + 2 * yy))
        rate = BLSystem(params, unit_grid, linear_only=True).physical_rate(state)
        w2 = float(omega_squared(params, np.array(5.0)))
        np.testing.assert_allclose(rate.phi1.values, state.phi2.values, atol=1e-13)
        np.testing.assert_allclose(rate.phi2.values, -w2 * state.phi1.values, atol=1e-12)

    @pytest.mark.white_box
    def test_linear_symbol_blocks(self, params, unit_grid):
        block = linear_symbol(params, unit_grid)
        assert block.shape == (2, 2) + unit_grid.spectral_shape
        np.testing.assert_allclose(block[1, 0], -omega_squared(params, unit_grid.k2))
        assert np.all(block[0, 1] == 1.0)

    @pytest.mark.white_box
    def test_propagator_matches_rotation(self, params, unit_grid):
        system = BLSystem(params, unit_grid)
        prop = system.propagator(0.7)
        w = system.omega[0, 3]
        np.testing.assert_allclose(prop[:, :, 0, 3], [[np.cos(0.7 * w), np.sin(0.7 * w) / w],
                                                      [-w * np.sin(0.7 * w), np.cos(0.7 * w)]], atol=1e-14)
        np.testing.assert_allclose(prop[:, :, 0, 0], [[1.0, 0.7], [0.0, 1.0]], atol=1e-15)

    @pytest.mark.black_box
    def test_non_finite_state_aborts(self, params, unit_grid):
        values = np.zeros(unit_grid.shape)
        values[1, 1] = np.nan
        with pytest.raises(BLError) as exc:
            rhs_bl(FieldPair.from_arrays(unit_grid, values, np.zeros(unit_grid.shape)), params)
        assert exc.value.code.value == "E0301"


class TestEnergy:
    """
    UNIT TESTS: energy, flux identity and weighted energies

    PURPOSE: Validate the conserved energy and the local energy law on resolved fields
    TESTING TYPE: Hybrid testing
    """

    @pytest.mark.black_box
    def test_zero_state_energy(self, params, unit_grid):
        assert energy_total(FieldPair.zeros(unit_grid), params) == 0.0
        flux = energy_density_flux(FieldPair.zeros(unit_grid), params)
        assert flux.residual == 0.0 and np.all(flux.flux_x == 0.0)

    @pytest.mark.black_box
    def test_sine_velocity_energy(self, params, unit_grid):
        xx, _ = unit_grid.mesh()
        state = FieldPair.from_arrays(unit_grid, np.zeros(unit_grid.shape), np.sin(xx))
        assert energy_total(state, params) == pytest.approx(2 * np.pi ** 2, rel=1e-12)

    @pytest.mark.hybrid
    def test_flux_identity_on_low_modes(self, params, low_mode_grid, rng):
        state = FieldPair.from_arrays(low_mode_grid, low_mode_field(low_mode_grid, rng),
                                      low_mode_field(low_mode_grid, rng))
        flux = energy_density_flux(state, params)
        assert flux.relative_residual <= 1e-6, f"dE/dt - div F should vanish, got {flux.relative_residual}"
        assert np.sum(flux.density) * low_mode_grid.cell_area == pytest.approx(energy_total(state, params))

    @pytest.mark.black_box
    def test_flux_identity_with_kink_background(self, params, soliton_grid, fast_profile):
        flux = energy_density_flux(line_wave_field(soliton_grid, fast_profile), params)
        assert flux.relative_residual <= 1e-6

    @pytest.mark.black_box
    def test_weight_limits(self, params, soliton_grid, fast_profile):
        state = line_wave_field(soliton_grid, fast_profile)
        total = energy_total(state, params)
        # wave at x = 0 sits far behind a weight centered at x = 20
        assert localized_energy(state, params, alpha=0.5, shift=20.0) < 1e-6 * total
        # weight centered far behind the wave is 2 on the wave
        assert localized_energy(state, params, alpha=0.5, shift=-20.0) == pytest.approx(2 * total, rel=1e-5)
        at_origin = virial_weighted_energy(state, params, alpha=1e-9, c1=1.2, t=0.0)
        assert at_origin == pytest.approx(total, rel=1e-6), "p_alpha tends to 1 as alpha -> 0"

    @pytest.mark.black_box
    def test_seam_guard_strict(self, params, soliton_grid, fast_profile):
        state = line_wave_field(soliton_grid, fast_profile)
        with pytest.raises(BLError) as exc:
            localized_energy(state, params, alpha=0.5, shift=30.0, strict=True)
        assert exc.value.code.value == "E0305"

    @pytest.mark.white_box
    def test_weighted_initial_size_scales_linearly(self, params):
        grid = make_grid(40.0, 40.0, 64, 64)
        xx, yy = grid.mesh()
        bump = np.exp(-(xx ** 2 + yy ** 2) / 4)
        small = weighted_initial_size(FieldPair.from_arrays(grid, bump, bump))
        large = weighted_initial_size(FieldPair.from_arrays(grid, 3 * bump, 3 * bump))
        assert large == pytest.approx(3 * small, rel=1e-12)


class TestDispersion:
    """
    UNIT TESTS: dispersion relation and flux symbol

    PURPOSE: Check |grad omega| <= 1, isotropy and positivity of the flux symbol
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_report_on_reference_grid(self, params):
        report = dispersion_check(params, make_grid(40.0, 20.0, 256, 128))
        assert report.omega_unit_x == pytest.approx(np.sqrt(0.75), abs=1e-5)
        assert report.max_group_speed <= 1 + 1e-12
        assert report.max_parallel_defect <= 1e-12
        assert report.long_wave_group_speed == pytest.approx(1.0)
        assert report.passed, report.violations

    @pytest.mark.black_box
    def test_group_speed_decreases_from_one(self, params):
        s = np.linspace(0.0, 50.0, 501)
        speeds = group_speed(params, s)
        assert speeds[0] == pytest.approx(1.0)
        assert np.all(speeds <= 1.0 + 1e-12)

    @pytest.mark.black_box
    def test_flux_symbol_positive(self, params):
        report = flux_symbol_check(params, make_grid(60.0, 60.0, 128, 128))
        assert report.passed and report.min_eigenvalue >= -1e-12
