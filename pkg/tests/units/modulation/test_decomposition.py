import numpy as np
import pytest
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import EvolutionConfig, ModulationSettings, PerturbationSpec
from benney_luke.evolution.energy import energy_total
from benney_luke.lab.scenarios import build_perturbation
from benney_luke.linear1d.zeta import adjoint_functions
from benney_luke.modulation.decomposition import (SPEED_STEP, band_basis, decompose_series, decompose_snapshot,
                                                  evolve_free_reference, projection_adjoint, reconstruct,
                                                  resolve_eta0)
from benney_luke.modulation.ygrid import y_grid
from benney_luke.soliton.line_wave import KinkBackground
from benney_luke.soliton.profile import SolitonProfile
from benney_luke.soliton.psi_correction import PsiCorrection
from benney_luke.spectral.fields import FieldPair
from benney_luke.spectral.grid import make_grid

C0 = 1.5
SETTINGS = ModulationSettings(eta0=0.3)


def shifted_snapshot(grid, params, shift):
    """phi_c0(X - shift(y)) stored as a periodic part over the c0 kink."""
    profile = SolitonProfile(params=params, c=C0)
    z = grid.x[None, :] - np.broadcast_to(shift, (grid.ny,))[:, None]
    background = KinkBackground(params=params, speed=C0)
    phi1 = profile.phi(z) - profile.phi(grid.x)[None, :]
    return FieldPair.from_arrays(grid, phi1, profile.r(z), background)


def speed_snapshot(grid, params, speed, h=10.0):
    """A line soliton of speed ``speed`` carrying the correction that keeps it periodic."""
    fast, reference = SolitonProfile(params=params, c=speed), SolitonProfile(params=params, c=C0)
    psi = PsiCorrection(params=params, c0=C0, h=h)
    x = grid.x
    phi1 = fast.phi(x) - reference.phi(x) - psi.psi_tilde(x + h, c=speed)
    return FieldPair.from_arrays(grid, np.tile(phi1, (grid.ny, 1)), np.tile(fast.r(x), (grid.ny, 1)),
                                 KinkBackground(params=params, speed=C0))


@pytest.fixture
def wide_grid():
    """Soliton box long enough in y to hold three band modes below eta0 = 0.3."""
    return make_grid(60.0, 64.0, 256, 16)


class TestBandBasis:
    """
    UNIT TESTS: real basis of band-limited transverse functions

    PURPOSE: Check the mode count and orthogonality of the columns
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_columns(self):
        grid = y_grid(64.0, 16)
        basis, modes, etas = band_basis(grid, 0.3)
        assert basis.shape == (16, 7)
        assert list(modes) == [0, 1, 1, 2, 2, 3, 3]
        gram = basis.T @ basis * grid.dy
        np.testing.assert_allclose(gram, np.diag(np.diag(gram)), atol=1e-12)

    @pytest.mark.white_box
    def test_only_mean_on_thin_box(self):
        basis, modes, etas = band_basis(y_grid(8.0, 8), 0.3)
        assert basis.shape == (8, 1) and etas.size == 1

    @pytest.mark.white_box
    def test_eta0_required(self):
        with pytest.raises(BLError) as err:
            resolve_eta0(ModulationSettings())
        assert err.value.code == Code.E0504
        assert resolve_eta0(SETTINGS) == 0.3


class TestDecomposeSnapshot:
    """
    UNIT TESTS: modulation parameters of a single snapshot

    PURPOSE: Recover known shifts and speeds, check residual, bookkeeping and guards
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_constant_shift(self, params, soliton_grid):
        snapshot = shifted_snapshot(soliton_grid, params, 0.05)
        state = decompose_snapshot(snapshot, FieldPair.zeros(soliton_grid), params, C0, settings=SETTINGS)
        np.testing.assert_allclose(state.gamma, 0.05, atol=1e-8)
        np.testing.assert_allclose(state.c_tilde, 0.0, atol=1e-8)
        assert state.residual <= 1e-10
        assert np.max(np.abs(state.orthogonality)) / soliton_grid.ly <= 1e-10

    @pytest.mark.black_box
    def test_transverse_shift(self, params, wide_grid):
        shift = 0.03 + 0.02 * np.cos(2 * np.pi * wide_grid.y / wide_grid.ly)
        snapshot = shifted_snapshot(wide_grid, params, shift)
        state = decompose_snapshot(snapshot, FieldPair.zeros(wide_grid), params, C0, settings=SETTINGS)
        np.testing.assert_allclose(state.gamma, shift, atol=1e-8)
        np.testing.assert_allclose(state.c_tilde, 0.0, atol=1e-8)

    @pytest.mark.black_box
    def test_speed_offset(self, params, soliton_grid):
        snapshot = speed_snapshot(soliton_grid, params, C0 + 0.01)
        state = decompose_snapshot(snapshot, FieldPair.zeros(soliton_grid), params, C0, settings=SETTINGS)
        np.testing.assert_allclose(state.c_tilde, 0.01, atol=1e-6)
        np.testing.assert_allclose(state.gamma, 0.0, atol=1e-6)
        np.testing.assert_allclose(state.speed, C0 + 0.01, atol=1e-6)

    @pytest.mark.black_box
    def test_reconstruct(self, params, wide_grid):
        shift = 0.04 - 0.01 * np.sin(4 * np.pi * wide_grid.y / wide_grid.ly)
        snapshot = shifted_snapshot(wide_grid, params, shift)
        state = decompose_snapshot(snapshot, FieldPair.zeros(wide_grid), params, C0, settings=SETTINGS)
        back = reconstruct(state)
        assert np.max(np.abs(back.phi1.values - snapshot.phi1.values)) <= 1e-12
        assert np.max(np.abs(back.phi2.values - snapshot.phi2.values)) <= 1e-12

    @pytest.mark.hybrid
    def test_zeta_adjoints(self, params, soliton_grid):
        settings = SETTINGS.model_copy(update={"adjoint": "zeta"})
        snapshot = shifted_snapshot(soliton_grid, params, -0.02)
        state = decompose_snapshot(snapshot, FieldPair.zeros(soliton_grid), params, C0, settings=settings)
        np.testing.assert_allclose(state.gamma, -0.02, atol=1e-8)
        assert state.residual <= 1e-10

    @pytest.mark.black_box
    def test_warm_start(self, params, soliton_grid):
        snapshot = shifted_snapshot(soliton_grid, params, 0.05)
        free = FieldPair.zeros(soliton_grid)
        cold = decompose_snapshot(snapshot, free, params, C0, settings=SETTINGS)
        warm = decompose_snapshot(snapshot, free, params, C0, settings=SETTINGS, initial=cold)
        assert warm.iterations == 0

    @pytest.mark.black_box
    def test_smallness_violation(self, params, soliton_grid):
        settings = SETTINGS.model_copy(update={"smallness": 1e-6})
        snapshot = shifted_snapshot(soliton_grid, params, 0.05)
        with pytest.raises(BLError) as err:
            decompose_snapshot(snapshot, FieldPair.zeros(soliton_grid), params, C0, settings=settings)
        assert err.value.code == Code.E0502

    @pytest.mark.black_box
    def test_no_convergence(self, params, soliton_grid):
        settings = SETTINGS.model_copy(update={"max_iter": 0})
        snapshot = shifted_snapshot(soliton_grid, params, 0.05)
        with pytest.raises(BLError) as err:
            decompose_snapshot(snapshot, FieldPair.zeros(soliton_grid), params, C0, settings=settings)
        assert err.value.code == Code.E0501

    @pytest.mark.black_box
    def test_grid_mismatch(self, params, soliton_grid, wide_grid):
        snapshot = shifted_snapshot(soliton_grid, params, 0.0)
        with pytest.raises(BLError) as err:
            decompose_snapshot(snapshot, FieldPair.zeros(wide_grid), params, C0, settings=SETTINGS)
        assert err.value.code == Code.E0103


class TestAdjointChoice:
    """
    UNIT TESTS: functions paired against the remainder in the orthogonality conditions

    PURPOSE: Check the local-speed expansion of g_k* and compare both adjoint choices on a bent crest
    TESTING TYPE: Hybrid unit testing
    """

    @pytest.mark.white_box
    def test_default_is_local_projection(self):
        assert ModulationSettings().adjoint == "projection"
        assert not ModulationSettings().recenter_adjoint

    @pytest.mark.white_box
    def test_speed_expansion_at_zero_mode(self, params, wide_grid):
        x = wide_grid.x[np.abs(wide_grid.x) <= 20.0]
        etas = np.array([0.0])
        base = projection_adjoint(params, C0, etas, x, SETTINGS)
        upper = projection_adjoint(params, C0 + SPEED_STEP, etas, x, SETTINGS)
        lower = projection_adjoint(params, C0 - SPEED_STEP, etas, x, SETTINGS)
        expanded = base + 0.01 * (upper - lower) / (2.0 * SPEED_STEP)
        exact = adjoint_functions(params, C0 + 0.01, x)
        for k, name in ((0, "zeta1_star"), (1, "zeta2_star")):
            expected = np.stack(exact[name])
            np.testing.assert_allclose(expanded[k, 0], expected, atol=1e-3 * np.max(np.abs(expected)))

    @pytest.mark.hybrid
    def test_bent_crest_agrees_across_adjoints(self, params, wide_grid):
        shift = 0.03 + 0.02 * np.cos(2 * np.pi * wide_grid.y / wide_grid.ly)
        snapshot = shifted_snapshot(wide_grid, params, shift)
        xx, yy = wide_grid.mesh()
        bump = 1e-3 * np.exp(-0.25 * (xx - 3.0) ** 2) * (1.0 + np.cos(2 * np.pi * yy / wide_grid.ly))
        bent = FieldPair.from_arrays(wide_grid, snapshot.phi1.values + bump, snapshot.phi2.values,
                                     snapshot.background)
        free = FieldPair.zeros(wide_grid)
        states = {choice: decompose_snapshot(bent, free, params, C0,
                                             settings=SETTINGS.model_copy(update={"adjoint": choice}))
                  for choice in ("zeta", "projection")}
        zeta, local = states["zeta"], states["projection"]
        assert zeta.residual <= 1e-10 and local.residual <= 1e-10
        moved = np.max(np.abs(zeta.gamma - shift)) + np.max(np.abs(zeta.c_tilde))
        gap = np.max(np.abs(local.gamma - zeta.gamma)) + np.max(np.abs(local.c_tilde - zeta.c_tilde))
        assert moved > 0.0
        # the two adjoints differ by O(eta0^2) on the resolved band
        assert gap <= 0.5 * moved

    @pytest.mark.black_box
    def test_exact_bent_crest_recovered_by_both(self, params, wide_grid):
        shift = 0.02 - 0.01 * np.sin(2 * np.pi * wide_grid.y / wide_grid.ly)
        snapshot = shifted_snapshot(wide_grid, params, shift)
        for choice in ("zeta", "projection"):
            settings = SETTINGS.model_copy(update={"adjoint": choice, "recenter_adjoint": choice == "zeta"})
            state = decompose_snapshot(snapshot, FieldPair.zeros(wide_grid), params, C0, settings=settings)
            np.testing.assert_allclose(state.gamma, shift, atol=1e-8)


class TestDecomposeSeries:
    """
    INTEGRATION TESTS: snapshot series into a modulation track

    PURPOSE: Verify ordering under threads and the recorded residuals
    TESTING TYPE: Black-box integration testing
    """

    @pytest.mark.black_box
    def test_order_kept(self, params, soliton_grid):
        shifts = [0.01, 0.02, 0.03, 0.04]
        snapshots = [(float(t), shifted_snapshot(soliton_grid, params, s)) for t, s in enumerate(shifts)]
        free = [FieldPair.zeros(soliton_grid)] * len(shifts)
        track, states = decompose_series(snapshots, free, params, C0, SETTINGS, threads=3)
        assert track.t == [0.0, 1.0, 2.0, 3.0]
        np.testing.assert_allclose(track.gamma_array()[:, 0], shifts, atol=1e-8)
        assert len(track.residual) == 4 and max(track.residual) <= 1e-10
        assert all(np.isnan(track.burgers_mismatch))

    @pytest.mark.black_box
    def test_length_mismatch(self, params, soliton_grid):
        with pytest.raises(BLError) as err:
            decompose_series([(0.0, shifted_snapshot(soliton_grid, params, 0.0))], [], params, C0, SETTINGS)
        assert err.value.code == Code.E0103


class TestFreeReference:
    """
    INTEGRATION TESTS: the free part U1 evolved on its own

    PURPOSE: Check the trivial solution, energy conservation and the background guard
    TESTING TYPE: Black-box integration testing
    """

    @pytest.mark.black_box
    def test_zero_stays_zero(self, params, soliton_grid):
        config = EvolutionConfig(dt=0.05, t_final=0.5, snapshot_every=5)
        result = evolve_free_reference(FieldPair.zeros(soliton_grid), params, config, C0)
        assert result.frame_speed == C0
        assert result.state.phi1.max_abs() == 0.0 and result.state.phi2.max_abs() == 0.0

    @pytest.mark.black_box
    def test_energy_conserved(self, params, soliton_grid):
        spec = PerturbationSpec(kind="localized_bump", epsilon=1e-3, width_x=4.0, width_y=8.0, offset=5.0)
        u0 = build_perturbation(soliton_grid, params, C0, spec)
        config = EvolutionConfig(dt=0.05, t_final=2.0, snapshot_every=10)
        result = evolve_free_reference(u0, params, config, C0)
        initial = energy_total(u0, params)
        assert initial > 0.0
        assert result.ledger.energy[0] == pytest.approx(initial, rel=1e-12)
        assert abs(energy_total(result.state, params) - initial) <= 1e-6 * initial
        assert result.ledger.relative_drift() <= 1e-6

    @pytest.mark.black_box
    def test_background_rejected(self, params, soliton_grid):
        config = EvolutionConfig(dt=0.05, t_final=0.5, snapshot_every=5)
        with pytest.raises(BLError) as err:
            evolve_free_reference(shifted_snapshot(soliton_grid, params, 0.0), params, config, C0)
        assert err.value.code == Code.E0103
