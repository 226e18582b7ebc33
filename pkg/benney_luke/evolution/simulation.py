"""Time stepping of a FieldPair with snapshots and an energy ledger.

States are stored in a frame moving at ``frame_speed``: the sample at
``x`` describes the lab point ``x + frame_speed * t``. A kink background
attached to the state moves with its own speed relative to that frame.
"""

from pathlib import Path
from typing import Callable, List, Optional, Union
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from benney_luke.common.error import BLError, Code
from benney_luke.common.factories import IntegratorFactory
from benney_luke.common.integrator_interface import IntegratorInterface, advance_background
from benney_luke.common.logging_config import internal_logger, run_logger
from benney_luke.common.models import EvolutionConfig, PhysParams
from benney_luke.spectral.fields import FieldPair
from benney_luke.spectral.grid import Grid2D
from benney_luke.spectral.multipliers import b_inverse_symbol
from benney_luke.spectral.snapshot_io import write_snapshot
from benney_luke.evolution.energy import energy_density_flux, energy_total, localized_energy
from benney_luke.evolution.system import BLSystem, stack_state, state_derivatives, unstack_state

RK4_STABILITY_LIMIT = 2.8

Observer = Callable[[float, FieldPair], None]


def explicit_radius(state: FieldPair, params: PhysParams) -> float:
    """
    Bound on the spectral radius of the explicit part's Jacobian around
    ``state``. Coefficients are frozen at their maxima; per grid wavenumber k
    the linearized products form the block [[0, 0], [u(k), v(k)]] with
    u = (|phi2| k^2 + 2 |grad phi2| k) / (1 + b k^2) and
    v = (|Lap phi| + 2 |grad phi| k) / (1 + b k^2), whose norm is hypot(u, v).
    """
    d = state_derivatives(state)
    k = np.sqrt(state.grid.k2)
    damping = b_inverse_symbol(params, state.grid)
    u = (np.max(np.abs(d.psi)) * k ** 2 + 2.0 * np.max(np.hypot(d.psi_x, d.psi_y)) * k) * damping
    v = (np.max(np.abs(d.phi_lap)) + 2.0 * np.max(np.hypot(d.phi_x, d.phi_y)) * k) * damping
    return float(np.max(np.hypot(u, v)))


def dt_max(state: FieldPair, params: PhysParams) -> float:
    """
    Largest step for which the explicit part stays inside the RK4 stability
    region, from the spectral radius of its symbol on the grid of ``state``.
    The linear block is propagated exactly and does not constrain the step.
    """
    radius = explicit_radius(state, params)
    if radius == 0.0:
        return float("inf")
    return float(RK4_STABILITY_LIMIT / radius)


def sponge_rate(grid: Grid2D, width: float, relaxation_time: float) -> np.ndarray:
    """Damping rate (1, nx), quadratic ramp up to 1/relaxation_time at the x-seam."""
    if width <= 0:
        return np.zeros((1, grid.nx))
    distance = 0.5 * grid.lx - np.abs(grid.x)
    ramp = np.clip(1.0 - distance / width, 0.0, 1.0) ** 2
    return (ramp / relaxation_time)[None, :]


class VirialProbe(BaseModel):
    """Parameters of the weighted energy sampled into the ledger."""
    alpha: float
    c1: float
    origin: float = 0.0


class EnergyLedger(BaseModel):
    t: List[float] = Field(default_factory=list)
    energy: List[float] = Field(default_factory=list)
    virial: List[float] = Field(default_factory=list)
    flux_residual: List[float] = Field(default_factory=list)

    def record(self, t: float, energy: float, virial: float, flux_residual: float) -> None:
        if self.t and t <= self.t[-1]:
            raise BLError(Code.E0304, message=f"ledger times must increase ({t} after {self.t[-1]})")
        if not np.isfinite(energy):
            raise BLError(Code.E0301, message=f"non-finite energy at t={t}")
        self.t.append(float(t))
        self.energy.append(float(energy))
        self.virial.append(float(virial))
        self.flux_residual.append(float(flux_residual))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "E": self.energy, "I": self.virial, "flux_residual": self.flux_residual})

    def relative_drift(self) -> float:
        """max |E(t) - E(0)| / E(0)."""
        if not self.energy or self.energy[0] == 0.0:
            return 0.0
        e = np.asarray(self.energy)
        return float(np.max(np.abs(e - e[0])) / abs(e[0]))


def sample_ledger(ledger: EnergyLedger, t: float, state: FieldPair, params: PhysParams, frame_speed: float,
                  energy: Optional[float] = None, virial: Optional[VirialProbe] = None) -> None:
    """Record E, the virial probe and the flux residual of ``state`` at ``t``."""
    if energy is None:
        energy = energy_total(state, params)
    weighted = 0.0
    if virial is not None:
        shift = virial.origin + (virial.c1 - frame_speed) * t
        weighted = localized_energy(state, params, virial.alpha, shift)
    residual = energy_density_flux(state, params).relative_residual
    ledger.record(t, energy, weighted, residual)


class SimulationResult(BaseModel):
    state: FieldPair
    t: float
    frame_speed: float
    ledger: EnergyLedger
    snapshots: List[Path] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class Simulation:
    """
    Owns one run: system, integrator and ledger. Not shared between threads;
    the states it hands to observers are immutable.
    """

    def __init__(self, params: PhysParams, grid: Grid2D, config: EvolutionConfig,
                 linear_only: bool = False, integrator: Optional[IntegratorInterface] = None):
        self.params = params
        self.grid = grid
        self.config = config
        self.linear_only = linear_only
        self.integrator = integrator or IntegratorFactory.get_integrator(config.integrator)
        self._system: Optional[BLSystem] = None
        self._sponge = sponge_rate(grid, config.sponge_width, config.sponge_time)

    def frame_speed_for(self, state: FieldPair) -> float:
        if self.config.frame_speed is not None:
            return self.config.frame_speed
        return float(state.background.speed) if state.background is not None else 0.0

    def system(self, frame_speed: float) -> BLSystem:
        if self._system is None or self._system.frame_speed != frame_speed:
            self._system = BLSystem(self.params, self.grid, frame_speed=frame_speed,
                                    dealias=self.config.dealias, linear_only=self.linear_only)
            self.integrator.prepare(self._system, self.config.dt)
        return self._system

    def _in_frame(self, state: FieldPair, frame_speed: float) -> FieldPair:
        if state.background is None or not hasattr(state.background, "in_frame"):
            return state
        return FieldPair(phi1=state.phi1, phi2=state.phi2, background=state.background.in_frame(frame_speed))

    def step(self, state: FieldPair, frame_speed: Optional[float] = None) -> FieldPair:
        """Advance ``state`` by one configured step."""
        if not state.grid.same_as(self.grid):
            raise BLError(Code.E0103, details={"state": state.grid.key(), "simulation": self.grid.key()})
        s = self.frame_speed_for(state) if frame_speed is None else frame_speed
        state = self._in_frame(state, s)
        system = self.system(s)
        dt = self.config.dt
        u = self.integrator.step(system, stack_state(state), state.background, dt)
        new = unstack_state(u, state, advance_background(state.background, dt))
        if self.config.sponge_width > 0:
            damping = np.exp(-self._sponge * dt)
            new = new.with_values(new.phi1.values * damping, new.phi2.values * damping)
        if not new.is_finite():
            raise BLError(Code.E0301, message="non-finite values after a step")
        return new

    def check_step_size(self, state: FieldPair) -> float:
        bound = dt_max(state, self.params)
        if self.config.dt > bound:
            raise BLError(Code.E0303, details={"dt": self.config.dt, "dt_max": bound})
        return bound

    def run(self, state: FieldPair, observer: Optional[Observer] = None,
            snapshot_dir: Optional[Union[str, Path]] = None,
            virial: Optional[VirialProbe] = None) -> SimulationResult:
        """
        Integrate to ``config.t_final``. At every snapshot the ledger is
        sampled, the observer called and, with ``snapshot_dir``, a BLK1 file
        written. Energy growth above ``config.energy_guard`` in one step
        aborts with E0302.
        """
        cfg = self.config
        s = self.frame_speed_for(state)
        state = self._in_frame(state, s)
        self.system(s)
        self.check_step_size(state)

        ledger = EnergyLedger()
        snapshots: List[Path] = []
        target = Path(snapshot_dir) if snapshot_dir is not None else None
        energy = energy_total(state, self.params)

        def emit(index: int, t: float, current: FieldPair, e: float) -> None:
            sample_ledger(ledger, t, current, self.params, s, e, virial)
            if target is not None:
                snapshots.append(write_snapshot(target / f"snapshot_{index:05d}.blk", current))
            if observer is not None:
                observer(t, current)

        emit(0, 0.0, state, energy)
        run_logger.info(f"Evolving {cfg.n_steps} steps of dt={cfg.dt} with {self.integrator.NAME} "
                        f"in a frame moving at {s}")
        for n in range(1, cfg.n_steps + 1):
            state = self.step(state, s)
            new_energy = energy_total(state, self.params)
            if cfg.energy_guard > 0 and new_energy > (1.0 + cfg.energy_guard) * energy:
                raise BLError(Code.E0302, details={"step": n, "before": energy, "after": new_energy})
            energy = new_energy
            if n % cfg.snapshot_every == 0:
                t = n * cfg.dt
                self.check_step_size(state)
                emit(n // cfg.snapshot_every, t, state, energy)
                internal_logger.debug(f"t={t:.4f} E={energy:.12e}")

        run_logger.info(f"Evolution done: relative energy drift {ledger.relative_drift():.3e}")
        return SimulationResult(state=state, t=cfg.n_steps * cfg.dt, frame_speed=s,
                                ledger=ledger, snapshots=snapshots)


def step(state: FieldPair, config: EvolutionConfig, params: PhysParams) -> FieldPair:
    """One step of ``config.dt`` with the configured integrator."""
    return Simulation(params, state.grid, config).step(state)
