"""Reduced modulation system on a periodic y-grid.

Form "gamma_c", with P the projection onto |eta| <= eta0:

    gamma_t = c~ + P(a11 gamma_yy + a12 c~_yy) + P[a15 gamma_y^2]
    c~_t    =      P(a21 gamma_yy + a22 c~_yy) + P[2 a23 c~_y gamma_y]

Form "gamma_b" replaces c~ by b = rho(c) - rho(c0):

    gamma_t = b + A-terms + P(p1 b^2 + a15 gamma_y^2)
    b_t     =     A-terms + P d_y(p2(c) gamma_y)

Both share the linear symbol A(c0, eta) = E12 - [a_ij] eta^2 on the band,
propagated exactly; the quadratic terms are stepped by RK4 in the
integrating-factor (Lawson) form.
"""

import math
from typing import List, Optional
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger, run_logger
from benney_luke.linear1d.coefficients import ModulationCoefficients, RhoMap, a_matrix
from benney_luke.modulation.burgers import profile_mismatch
from benney_luke.modulation.semigroup import band_edge, expm2
from benney_luke.modulation.ygrid import ReducedState, YGrid

BLOWUP_FACTOR = 1e3
TRACK_COLUMNS = ["t", "c_norm", "cy_norm", "gamma_y_norm", "gamma_sup", "burgers_mismatch"]


class ModulationTrack(BaseModel):
    """
    Time samples of (gamma, c~) and, when a rho map is available, b.
    Norm series are computed as samples are recorded.
    """
    grid: YGrid
    c0: float
    t: List[float] = Field(default_factory=list)
    gamma: List[np.ndarray] = Field(default_factory=list)
    c_tilde: List[np.ndarray] = Field(default_factory=list)
    b: List[np.ndarray] = Field(default_factory=list)
    c_norm: List[float] = Field(default_factory=list)
    cy_norm: List[float] = Field(default_factory=list)
    gamma_y_norm: List[float] = Field(default_factory=list)
    gamma_sup: List[float] = Field(default_factory=list)
    burgers_mismatch: List[float] = Field(default_factory=list)
    residual: List[float] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def record(self, t: float, gamma: np.ndarray, c_tilde: np.ndarray, b: Optional[np.ndarray] = None,
               mismatch: float = math.nan, residual: Optional[float] = None) -> None:
        if self.t and t <= self.t[-1]:
            raise BLError(Code.E0503, message=f"track times must increase ({t} after {self.t[-1]})")
        grid = self.grid
        self.t.append(float(t))
        self.gamma.append(np.asarray(gamma, dtype=float).copy())
        self.c_tilde.append(np.asarray(c_tilde, dtype=float).copy())
        if b is not None:
            self.b.append(np.asarray(b, dtype=float).copy())
        self.c_norm.append(grid.norm(c_tilde))
        self.cy_norm.append(grid.norm(grid.derivative(c_tilde)))
        self.gamma_y_norm.append(grid.norm(grid.derivative(gamma)))
        self.gamma_sup.append(float(np.max(np.abs(gamma))))
        self.burgers_mismatch.append(float(mismatch))
        if residual is not None:
            self.residual.append(float(residual))

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.t)

    def gamma_array(self) -> np.ndarray:
        return np.stack(self.gamma) if self.gamma else np.zeros((0, self.grid.n))

    def c_tilde_array(self) -> np.ndarray:
        return np.stack(self.c_tilde) if self.c_tilde else np.zeros((0, self.grid.n))

    def b_array(self) -> Optional[np.ndarray]:
        return np.stack(self.b) if self.b else None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({name: getattr(self, name) for name in TRACK_COLUMNS}, columns=TRACK_COLUMNS)


def linear_symbol(coeffs: ModulationCoefficients, grid: YGrid, eta0: Optional[float] = None) -> np.ndarray:
    """A(c0, eta) on the modes of ``grid``, shape (2, 2, n)."""
    eta0 = band_edge(coeffs, eta0)
    return a_matrix(coeffs.with_eta0(eta0), grid.eta)


def _p2(b: np.ndarray, coeffs: ModulationCoefficients, rho_map: Optional[RhoMap]) -> np.ndarray:
    if rho_map is None:
        # first order in b: a21~'(c0) = 2 a23(c0) and b = c - c0 + O(b^2)
        return 2.0 * coeffs.aij(2, 3) * b
    return rho_map.p2_of_b(b)


def quadratic_terms(stacked: np.ndarray, grid: YGrid, coeffs: ModulationCoefficients, form: str,
                    eta0: float, rho_map: Optional[RhoMap] = None) -> np.ndarray:
    """Projected quadratic part of the rate for a physical (2, n) pair."""
    gamma, speed = stacked
    gamma_y = grid.derivative(gamma)
    first = coeffs.aij(1, 5) * gamma_y ** 2
    if form == "gamma_c":
        second = 2.0 * coeffs.aij(2, 3) * grid.derivative(speed) * gamma_y
    else:
        first = first + coeffs.p1 * speed ** 2
        second = grid.derivative(_p2(speed, coeffs, rho_map) * gamma_y)
    return grid.project(np.stack([first, second]), eta0)


def reduced_rhs(state: ReducedState, coeffs: ModulationCoefficients, eta0: Optional[float] = None,
                rho_map: Optional[RhoMap] = None) -> ReducedState:
    """Rate of the reduced system at ``state`` in the state's form."""
    eta0 = band_edge(coeffs, eta0)
    grid = state.grid
    grid.check_band(eta0)
    stacked = state.stacked()
    linear = grid.ifft(np.einsum("ijn,jn->in", linear_symbol(coeffs, grid, eta0), grid.fft(stacked)))
    rate = linear + quadratic_terms(stacked, grid, coeffs, state.form, eta0, rho_map)
    return ReducedState.from_stacked(grid, rate, state.form)


class _LawsonRK4:
    """Integrating-factor RK4 for u_t = L u + N(u) with a mode-wise 2 x 2 L."""

    def __init__(self, symbol: np.ndarray, dt: float, nonlinear):
        self.full = expm2(symbol, dt)
        self.half = expm2(symbol, 0.5 * dt)
        self.dt = dt
        self.nonlinear = nonlinear

    @staticmethod
    def _apply(matrix: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.einsum("ijn,jn->in", matrix, u)

    def step(self, u: np.ndarray) -> np.ndarray:
        h, e, e2, n = self.dt, self.full, self.half, self.nonlinear
        k1 = n(u)
        k2 = n(self._apply(e2, u + 0.5 * h * k1))
        k3 = n(self._apply(e2, u) + 0.5 * h * k2)
        k4 = n(self._apply(e, u) + h * self._apply(e2, k3))
        return self._apply(e, u) + h / 6.0 * (self._apply(e, k1) + 2.0 * self._apply(e2, k2 + k3) + k4)


def _speed_and_b(stacked: np.ndarray, form: str, c0: float, rho_map: Optional[RhoMap]) -> tuple:
    if form == "gamma_c":
        c_tilde = stacked[1]
        b = rho_map.b_of_speed(c0 + c_tilde) if rho_map is not None else None
    else:
        b = stacked[1]
        c_tilde = rho_map.speed_of_b(b) - c0 if rho_map is not None else b
    return c_tilde, b


def burgers_mismatch(gamma: np.ndarray, c_tilde: np.ndarray, grid: YGrid, coeffs: ModulationCoefficients,
                     t: float) -> float:
    if t <= 0.0:
        return math.nan
    try:
        return profile_mismatch(grid.derivative(gamma), c_tilde, coeffs, t, grid.y)
    except BLError as e:
        internal_logger.debug(f"Burgers mismatch unavailable at t={t}: {e}")
        return math.nan


def integrate_reduced(init: ReducedState, coeffs: ModulationCoefficients, t_final: float, dt: float,
                      record_every: int = 1, eta0: Optional[float] = None, rho_map: Optional[RhoMap] = None,
                      mismatch: bool = True) -> ModulationTrack:
    """
    March ``init`` to ``t_final`` and record every ``record_every`` steps
    (t = 0 included). A non-finite state or a sup norm above
    BLOWUP_FACTOR times the initial one raises E0503.
    """
    eta0 = band_edge(coeffs, eta0)
    grid = init.grid
    grid.check_band(eta0)
    n_steps = int(round(t_final / dt)) if dt > 0 else 0
    if n_steps < 1 or abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise BLError(Code.E0304, message="t_final must be a positive whole number of steps",
                      details={"dt": dt, "t_final": t_final})
    if record_every < 1:
        raise BLError(Code.E0304, message="record_every must be >= 1")

    form = init.form
    state = init.projected(eta0)
    initial_sup = state.sup()
    limit = BLOWUP_FACTOR * initial_sup

    def nonlinear(u_hat: np.ndarray) -> np.ndarray:
        return grid.fft(quadratic_terms(grid.ifft(u_hat), grid, coeffs, form, eta0, rho_map))

    stepper = _LawsonRK4(linear_symbol(coeffs, grid, eta0), dt, nonlinear)
    track = ModulationTrack(grid=grid, c0=coeffs.c0)

    def emit(t: float, stacked: np.ndarray) -> None:
        c_tilde, b = _speed_and_b(stacked, form, coeffs.c0, rho_map)
        value = burgers_mismatch(stacked[0], c_tilde, grid, coeffs, t) if mismatch else math.nan
        track.record(t, stacked[0], c_tilde, b, value)

    emit(0.0, state.stacked())
    run_logger.info(f"Integrating the reduced system ({form}) for {n_steps} steps of dt={dt}, eta0={eta0}")
    u_hat = grid.fft(state.stacked())
    for n in range(1, n_steps + 1):
        u_hat = stepper.step(u_hat)
        if not np.all(np.isfinite(u_hat)):
            raise BLError(Code.E0503, message="non-finite reduced state", details={"step": n, "t": n * dt})
        if n % record_every == 0 or n == n_steps:
            stacked = grid.ifft(u_hat)
            sup = float(np.max(np.abs(stacked)))
            if not np.isfinite(sup) or (initial_sup > 0 and sup > limit):
                raise BLError(Code.E0503, details={"step": n, "t": n * dt, "sup": sup, "initial_sup": initial_sup})
            emit(n * dt, stacked)
    run_logger.info(f"Reduced system done: |c~| {track.c_norm[0]:.3e} -> {track.c_norm[-1]:.3e}")
    return track
