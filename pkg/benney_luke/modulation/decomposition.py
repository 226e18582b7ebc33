"""Decomposition of snapshots into a modulating line soliton, a free part and a remainder.

In the frame moving at c0, with X = x - origin,

    Phi(X, y) = Phi_{c(y)}(X - gamma(y)) + U1 + U2 - Psi_{c(y)}(X - gamma(y) + off)

where c = c0 + c~, off = (c0 - 1) t / 2 + h and Phi_c = (phi_c, r_c). The
band-limited pair (c~, gamma) is fixed by

    F_k(eta) = sum_y exp(-i y eta) sum_x U2(z + gamma(y), y) . G_k(z, eta, y) dx dy = 0,    k = 1, 2

for every transverse mode |eta| <= eta0 of the periodic box. By default
("projection") G_k is the projection adjoint g_k*(z, eta, c(y)) at the local
speed, expanded to first order in c - c0 from pairs built at c0 and c0 +- SPEED_STEP.
"zeta" uses zeta_k* = g_k*(z, 0, c(y)) for every mode, which differs by O(eta^2).
With ``recenter_adjoint`` either choice is evaluated at the y-averaged c.
U2(z + gamma) is sampled by rolling the periodic data in x with a spectral
phase, so no interpolation in z is needed.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import numpy as np
import scipy.fft as sfft
from pydantic import BaseModel, ConfigDict
from scipy.linalg import lu_factor, lu_solve
from benney_luke.common.error import BLError, Code, warn_or_raise
from benney_luke.common.logging_config import internal_logger, run_logger
from benney_luke.common.models import EvolutionConfig, ModulationSettings, PhysParams
from benney_luke.soliton.profile import phi_jet, r_jet, soliton_profile
from benney_luke.soliton.psi_correction import PsiCorrection
from benney_luke.spectral.fields import FieldPair
from benney_luke.spectral.grid import Grid2D, fft_workers
from benney_luke.evolution.simulation import Observer, Simulation, SimulationResult
from benney_luke.linear1d.coefficients import ModulationCoefficients, RhoMap
from benney_luke.linear1d.grid1d import grid1d_for
from benney_luke.linear1d.projection import ProjectionPair, basis_pair, projection_pair
from benney_luke.linear1d.zeta import adjoint_functions, zeta_basis
from benney_luke.modulation.reduced import ModulationTrack, burgers_mismatch
from benney_luke.modulation.ygrid import YGrid

CHORD_RATIO = 0.5
FD_STEP = 1e-7
CONDITION_LIMIT = 1e14
SPEED_STEP = 1e-3

_PAIR_CACHE: Dict[tuple, ProjectionPair] = {}
_PAIR_LOCK = threading.Lock()


def evolve_free_reference(u0: FieldPair, params: PhysParams, config: EvolutionConfig, c0: float,
                          observer: Optional[Observer] = None,
                          snapshot_dir: Optional[Union[str, Path]] = None) -> SimulationResult:
    """U1: the perturbation alone, evolved by the full equation in the frame moving at c0."""
    if u0.background is not None:
        raise BLError(Code.E0103, message="the free reference starts from periodic data without a background")
    frame_config = config.model_copy(update={"frame_speed": c0})
    return Simulation(params, u0.grid, frame_config).run(u0, observer=observer, snapshot_dir=snapshot_dir)


class DecompositionState(BaseModel):
    """One decomposed snapshot. ``u2`` holds periodic samples only."""
    params: PhysParams
    t: float
    c0: float
    h: float
    origin: float
    eta0: float
    ygrid: YGrid
    c_tilde: np.ndarray
    gamma: np.ndarray
    coefficients: np.ndarray
    u1: FieldPair
    u2: FieldPair
    background: Optional[Any] = None
    orthogonality: np.ndarray
    residual: float
    iterations: int
    refreshed: bool
    w_norm: float

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def speed(self) -> np.ndarray:
        return self.c0 + self.c_tilde

    @property
    def offset(self) -> float:
        return PsiCorrection(params=self.params, c0=self.c0, h=self.h).offset(self.t)


def resolve_eta0(settings: ModulationSettings, coeffs: Optional[ModulationCoefficients] = None) -> float:
    eta0 = settings.eta0 if settings.eta0 is not None else (coeffs.eta0 if coeffs is not None else None)
    if eta0 is None:
        raise BLError(Code.E0504, message="no band edge eta0 configured")
    return float(eta0)


def band_basis(ygrid: YGrid, eta0: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Real basis of band-limited functions on ``ygrid``: columns 1, cos(eta_m y),
    sin(eta_m y) for 0 < eta_m <= eta0. Returns (basis, column modes, etas).
    """
    eta_step = 2.0 * np.pi / ygrid.length
    count = min(int(np.floor(eta0 / eta_step + 1e-12)), ygrid.n // 2 - 1)
    etas = eta_step * np.arange(count + 1)
    y = ygrid.y
    columns, modes = [np.ones_like(y)], [0]
    for m in range(1, count + 1):
        columns += [np.cos(etas[m] * y), np.sin(etas[m] * y)]
        modes += [m, m]
    return np.stack(columns, axis=1), np.asarray(modes), etas


def _cached_pair(params: PhysParams, c: float, eta: float, settings: ModulationSettings,
                 coeffs: Optional[ModulationCoefficients], strict: bool) -> ProjectionPair:
    key = (params.a, params.b, c, eta, settings.alpha, settings.grid1d_n, settings.grid1d_decay)
    with _PAIR_LOCK:
        pair = _PAIR_CACHE.get(key)
    if pair is None:
        grid = grid1d_for(soliton_profile(params, c), settings.alpha, settings.grid1d_n, settings.grid1d_decay)
        try:
            pair = projection_pair(params, c, eta, grid, coeffs=coeffs, strict=strict)
        except BLError as e:
            if strict or e.code != Code.E0404:
                raise
            warn_or_raise(Code.W0406, f"resonant branch ambiguous at c={c}, eta={eta}", False,
                          details={"c": c, "eta": eta})
            pair = basis_pair(zeta_basis(params, c, grid), eta)
        with _PAIR_LOCK:
            _PAIR_CACHE[key] = pair
    return pair


def projection_adjoint(params: PhysParams, c: float, etas: np.ndarray, points: np.ndarray,
                       settings: ModulationSettings, coeffs: Optional[ModulationCoefficients] = None,
                       strict: bool = False) -> np.ndarray:
    """
    g_k*(z, eta, c) at ``points`` for every eta, shape (k, mode, component, len(points)).
    Samples beyond the 1D box continue with zeta_k* at the same speed.
    """
    points = np.asarray(points, dtype=float)
    out = np.empty((2, len(etas), 2, points.size))
    continuation = adjoint_functions(params, c, points)
    for m, eta in enumerate(etas):
        pair = _cached_pair(params, c, float(eta), settings, coeffs, strict)
        inside = np.abs(points) <= pair.grid.length
        for k, name in ((1, "zeta1_star"), (2, "zeta2_star")):
            out[k - 1, m] = np.stack(continuation[name])
            out[k - 1, m][:, inside] = pair.adjoint_on(points[inside], k)
    return out


class _Decomposer:
    """Residual, Jacobians and Newton loop for one snapshot."""

    def __init__(self, snapshot: FieldPair, u1: FieldPair, params: PhysParams, c0: float, t: float,
                 settings: ModulationSettings, coeffs: Optional[ModulationCoefficients], origin: Optional[float],
                 strict: bool):
        if not snapshot.grid.same_as(u1.grid):
            raise BLError(Code.E0103, details={"snapshot": snapshot.grid.key(), "free": u1.grid.key()})
        if u1.background is not None:
            raise BLError(Code.E0103, message="the free part must be periodic")
        self.grid: Grid2D = snapshot.grid
        self.params, self.c0, self.t, self.settings, self.coeffs = params, c0, t, settings, coeffs
        self.strict = strict
        self.background = snapshot.background
        if origin is None:
            origin = float(getattr(self.background, "offset", 0.0)) if self.background is not None else 0.0
        self.origin = origin
        self.ygrid = YGrid(length=self.grid.ly, n=self.grid.ny)
        self.eta0 = resolve_eta0(settings, coeffs)
        self.basis, self.modes, self.etas = band_basis(self.ygrid, self.eta0)
        self.gram = self.basis.T @ self.basis * self.ygrid.dy
        self.size = self.basis.shape[1]
        self.X = self.grid.x - origin
        self.psi = PsiCorrection(params=params, c0=c0, h=settings.h)
        self.off = self.psi.offset(t)
        self.u1 = u1
        self.p = np.stack([snapshot.phi1.values - u1.phi1.values, snapshot.phi2.values - u1.phi2.values])
        self.p_hat = sfft.fft(self.p, axis=-1, workers=fft_workers())
        self.alpha = settings.alpha if settings.alpha is not None else 0.5 * soliton_profile(params, c0).alpha
        self._projection: Optional[Tuple[np.ndarray, np.ndarray]] = None

    # fields -----------------------------------------------------------------

    def fields(self, coefficients: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        c_tilde = self.basis @ coefficients[:self.size]
        gamma = self.basis @ coefficients[self.size:]
        return c_tilde, gamma

    def _background(self, x: np.ndarray) -> np.ndarray:
        return self.background.sample(x) if self.background is not None else 0.0

    def rolled(self, gamma: np.ndarray) -> np.ndarray:
        """(P1, P2)(x + gamma(y), y) on the grid points."""
        phase = np.exp(1j * self.grid.xi[None, :] * gamma[:, None])
        return sfft.ifft(self.p_hat * phase[None], axis=-1, workers=fft_workers()).real

    def remainder(self, c: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        """U2(z + gamma(y), y) at z = X, shape (2, ny, nx)."""
        params, cc, z = self.params, c[:, None], self.X[None, :]
        shifted = self.rolled(gamma)
        first = (shifted[0] + self._background(self.grid.x[None, :] + gamma[:, None])
                 - phi_jet(params, cc, z).v + self.psi.psi_tilde(z + self.off, c=cc))
        second = shifted[1] - r_jet(params, cc, z).v
        return np.stack([first, second])

    def w_norm(self) -> float:
        """
        Size of W = Phi - U1 - Phi_{c0} per unit crest length, with the weight
        exp(2 alpha min(X, Lx/4)) capped a quarter box ahead of the crest.
        """
        z = self.X[None, :]
        first = self.p[0] + self._background(self.grid.x[None, :]) - phi_jet(self.params, self.c0, z).v
        second = self.p[1] - r_jet(self.params, self.c0, z).v
        weight = np.exp(2.0 * self.alpha * np.minimum(self.X, 0.25 * self.grid.lx))[None, :]
        total = np.sum((first ** 2 + second ** 2) * weight) * self.grid.cell_area
        return float(np.sqrt(total / self.grid.ly))

    # adjoints ----------------------------------------------------------------

    def _zeta_adjoints(self, c: np.ndarray) -> np.ndarray:
        """(k, component, ny or 1, nx)."""
        reference = np.mean(c) if self.settings.recenter_adjoint else c[:, None]
        samples = adjoint_functions(self.params, reference, self.X[None, :])
        stars = [np.broadcast_arrays(*samples[name]) for name in ("zeta1_star", "zeta2_star")]
        return np.array(stars)

    def local_adjoints(self) -> Tuple[np.ndarray, np.ndarray]:
        """g_k* at c0 and its c-derivative by central differences, each (k, mode, component, nx)."""
        if self._projection is None:
            def at(c: float) -> np.ndarray:
                return projection_adjoint(self.params, c, self.etas, self.X, self.settings, self.coeffs,
                                          self.strict)

            upper, lower = at(self.c0 + SPEED_STEP), at(self.c0 - SPEED_STEP)
            self._projection = (at(self.c0), (upper - lower) / (2.0 * SPEED_STEP))
        return self._projection

    def projections(self, remainder: np.ndarray, c: np.ndarray) -> np.ndarray:
        """f_k(mode, y) = sum_x remainder . G_k dx, shape (2, modes or 1, ny)."""
        dx = self.grid.dx
        if self.settings.adjoint == "projection":
            base, slope = self.local_adjoints()
            c_tilde = np.broadcast_to(np.asarray(c, dtype=float) - self.c0, (self.grid.ny,))
            if self.settings.recenter_adjoint:
                c_tilde = np.full(self.grid.ny, np.mean(c_tilde))
            f = (np.einsum("kmcx,cyx->kmy", base, remainder)
                 + c_tilde[None, None, :] * np.einsum("kmcx,cyx->kmy", slope, remainder))
            return f * dx
        stars = self._zeta_adjoints(c)
        return (np.sum(stars * remainder[None], axis=(1, 3)) * dx)[:, None, :]

    # residual ----------------------------------------------------------------

    def _rows(self, f: np.ndarray) -> np.ndarray:
        picked = f[:, self.modes if f.shape[1] > 1 else np.zeros_like(self.modes), :]
        return np.einsum("yj,kjy->kj", self.basis, picked) * self.ygrid.dy

    def residual(self, coefficients: np.ndarray) -> np.ndarray:
        c_tilde, gamma = self.fields(coefficients)
        c = self.c0 + c_tilde
        try:
            f = self.projections(self.remainder(c, gamma), c)
        except BLError as e:
            if e.code == Code.E0201:
                raise BLError(Code.E0501, message="speed left the admissible range during the iteration",
                              details={"c_min": float(np.min(c)), "c_max": float(np.max(c))}, cause=e) from e
            raise
        return self._rows(f).reshape(-1)

    def orthogonality(self, rows: np.ndarray) -> np.ndarray:
        """Complex F_k(eta_m), shape (2, modes); cos rows give Re F, sin rows -Im F."""
        rows = rows.reshape(2, self.size)
        out = np.zeros((2, self.etas.size), dtype=complex)
        out[:, 0] = rows[:, 0]
        out[:, 1:] = rows[:, 1::2] - 1j * rows[:, 2::2]
        return out

    def residual_norm(self, rows: np.ndarray) -> float:
        return float(np.max(np.abs(self.orthogonality(rows))) / self.grid.ly)

    # Jacobians ---------------------------------------------------------------

    def seeded_jacobian(self) -> np.ndarray:
        """
        Constant-coefficient Jacobian at (c~, gamma) = 0: columns of c~ see
        -d_c Phi_{c0} + d_c Psi_{c0}, columns of gamma see d_z Phi_{c0}.
        """
        params, z = self.params, self.X[None, :]
        c = np.full(self.grid.ny, self.c0)
        d_speed = np.stack([-phi_jet(params, self.c0, z).d1 + self.psi.psi_tilde(z + self.off, c=self.c0, dc=1),
                            -r_jet(params, self.c0, z).d1])
        d_shift = np.stack([phi_jet(params, self.c0, z, 1).v, r_jet(params, self.c0, z, 1).v])
        # (k, mode, j) pairings, one x-profile per unknown family
        f = np.stack([self.projections(np.broadcast_to(d, (2, self.grid.ny, self.X.size)), c)[:, :, 0]
                      for d in (d_speed, d_shift)], axis=-1)
        per_row = f[:, self.modes if f.shape[1] > 1 else np.zeros_like(self.modes), :]
        blocks = [[per_row[k, :, j][:, None] * self.gram for j in range(2)] for k in range(2)]
        return np.block(blocks)

    def difference_jacobian(self, coefficients: np.ndarray, base: np.ndarray) -> np.ndarray:
        jac = np.empty((base.size, coefficients.size))
        for j in range(coefficients.size):
            step = FD_STEP * max(1.0, abs(coefficients[j]))
            probe = coefficients.copy()
            probe[j] += step
            jac[:, j] = (self.residual(probe) - base) / step
        return jac

    # Newton --------------------------------------------------------------------

    def solve(self, initial: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, int, bool]:
        settings = self.settings
        p = np.zeros(2 * self.size) if initial is None else np.array(initial, dtype=float)
        rows = self.residual(p)
        jac = self.seeded_jacobian()
        refreshed = False
        if np.linalg.cond(jac) > CONDITION_LIMIT:
            jac, refreshed = self._refresh(p, rows), True
        factors = lu_factor(jac)
        for iteration in range(settings.max_iter + 1):
            norm = self.residual_norm(rows)
            internal_logger.debug(f"decomposition t={self.t}: iteration {iteration}, residual {norm:.3e}")
            if norm <= settings.newton_tol:
                return p, rows, iteration, refreshed
            if iteration == settings.max_iter:
                break
            candidate = p + lu_solve(factors, -rows)
            candidate_rows = self.residual(candidate)
            if self.residual_norm(candidate_rows) > CHORD_RATIO * norm:
                factors = lu_factor(self._refresh(p, rows))
                refreshed = True
                candidate = p + lu_solve(factors, -rows)
                candidate_rows = self.residual(candidate)
            p, rows = candidate, candidate_rows
        raise BLError(Code.E0501, details={"t": self.t, "iterations": settings.max_iter,
                                           "residual": self.residual_norm(rows), "tolerance": settings.newton_tol})

    def _refresh(self, p: np.ndarray, rows: np.ndarray) -> np.ndarray:
        jac = self.difference_jacobian(p, rows)
        if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > CONDITION_LIMIT:
            raise BLError(Code.X0501, message="finite-difference Jacobian is singular", details={"t": self.t})
        internal_logger.debug(f"decomposition t={self.t}: Jacobian refreshed by finite differences")
        return jac

    def remainder_field(self, c_tilde: np.ndarray, gamma: np.ndarray) -> FieldPair:
        """U2 on the grid: P + (Theta, 0) - Phi_c(X - gamma) + Psi_c(X - gamma + off)."""
        params, cc = self.params, (self.c0 + c_tilde)[:, None]
        z = self.X[None, :] - gamma[:, None]
        first = (self.p[0] + self._background(self.grid.x[None, :]) - phi_jet(params, cc, z).v
                 + self.psi.psi_tilde(z + self.off, c=cc))
        second = self.p[1] - r_jet(params, cc, z).v
        return FieldPair.from_arrays(self.grid, first, second)


def decompose_snapshot(snapshot: FieldPair, u1: FieldPair, params: PhysParams, c0: float, t: float = 0.0,
                       settings: Optional[ModulationSettings] = None,
                       coeffs: Optional[ModulationCoefficients] = None, origin: Optional[float] = None,
                       initial: Optional[DecompositionState] = None, strict: bool = False) -> DecompositionState:
    """
    Split ``snapshot`` (stored in the c0 frame) given its free part ``u1``.
    ``origin`` defaults to the offset of the snapshot's kink background.
    Raises E0502 when the perturbation is above ``settings.smallness``,
    E0501 when Newton does not reach ``settings.newton_tol`` and X0501
    when a refreshed Jacobian is singular.
    """
    settings = settings or ModulationSettings()
    solver = _Decomposer(snapshot, u1, params, c0, t, settings, coeffs, origin, strict)
    w_norm = solver.w_norm()
    if w_norm > settings.smallness:
        raise BLError(Code.E0502, details={"t": t, "w_norm": w_norm, "threshold": settings.smallness})
    start = initial.coefficients if initial is not None and initial.coefficients.size == 2 * solver.size else None
    p, rows, iterations, refreshed = solver.solve(start)
    c_tilde, gamma = solver.fields(p)
    return DecompositionState(
        params=params, t=t, c0=c0, h=settings.h, origin=solver.origin, eta0=solver.eta0, ygrid=solver.ygrid,
        c_tilde=c_tilde, gamma=gamma, coefficients=p, u1=u1, u2=solver.remainder_field(c_tilde, gamma),
        background=solver.background, orthogonality=solver.orthogonality(rows),
        residual=solver.residual_norm(rows), iterations=iterations, refreshed=refreshed, w_norm=w_norm)


def reconstruct(state: DecompositionState) -> FieldPair:
    """Phi = Phi_c(X - gamma) + U1 + U2 - Psi_c(X - gamma + off), with the background split off again."""
    grid = state.u2.grid
    params, cc = state.params, state.speed[:, None]
    z = (grid.x - state.origin)[None, :] - state.gamma[:, None]
    psi = PsiCorrection(params=params, c0=state.c0, h=state.h)
    first = (phi_jet(params, cc, z).v + state.u1.phi1.values + state.u2.phi1.values
             - psi.psi_tilde(z + state.offset, c=cc))
    second = r_jet(params, cc, z).v + state.u1.phi2.values + state.u2.phi2.values
    if state.background is not None:
        first = first - state.background.sample(grid.x)[None, :]
    return FieldPair.from_arrays(grid, first, second, state.background)


def decompose_series(snapshots: Sequence[Tuple[float, FieldPair]], free: Sequence[FieldPair], params: PhysParams,
                     c0: float, settings: Optional[ModulationSettings] = None,
                     coeffs: Optional[ModulationCoefficients] = None, rho_map: Optional[RhoMap] = None,
                     origin: Optional[float] = None, threads: int = 1,
                     strict: bool = False) -> Tuple[ModulationTrack, List[DecompositionState]]:
    """
    Decompose every (t, snapshot) against the matching free part. Snapshots
    are processed on ``threads`` workers; results keep the input order.
    """
    if len(snapshots) != len(free):
        raise BLError(Code.E0103, message=f"{len(snapshots)} snapshots but {len(free)} free parts")
    settings = settings or ModulationSettings()

    def work(item) -> DecompositionState:
        (t, snapshot), u1 = item
        return decompose_snapshot(snapshot, u1, params, c0, t, settings, coeffs, origin, strict=strict)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        states = list(pool.map(work, zip(snapshots, free)))

    if not states:
        raise BLError(Code.E0501, message="no snapshots to decompose")
    track = ModulationTrack(grid=states[0].ygrid, c0=c0)
    for state in states:
        b = rho_map.b_of_speed(state.speed) if rho_map is not None else None
        mismatch = burgers_mismatch(state.gamma, state.c_tilde, state.ygrid, coeffs, state.t) \
            if coeffs is not None else float("nan")
        track.record(state.t, state.gamma, state.c_tilde, b, mismatch, residual=state.residual)
    run_logger.info(f"Decomposed {len(states)} snapshots; largest residual {max(track.residual):.3e}")
    return track, states
