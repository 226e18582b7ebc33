"""Energy, energy flux and weighted energies of a state.

The energy density is
    E = 1/2 {phi2^2 + b |grad phi2|^2 + |grad phi1|^2 + a (Lap phi1)^2}
and it satisfies the local law dE/dt = div F with
    F = phi2 B^-1 A grad phi1 + a Lap phi1 grad phi2
        - b phi2 grad B^-1 (phi2 Lap phi1 + 2 grad phi1 . grad phi2) - phi2^2 grad phi1.
"""

from typing import Optional
import numpy as np
from pydantic import BaseModel, ConfigDict
from benney_luke.common.error import BLError, Code, warn_or_raise
from benney_luke.common.models import PhysParams
from benney_luke.spectral.fields import FieldPair, transform, inverse_transform
from benney_luke.spectral.grid import Grid2D
from benney_luke.spectral.multipliers import a_symbol, b_inverse_symbol
from benney_luke.evolution.system import BLSystem, StateDerivatives, nonlinear_term, state_derivatives

SEAM_ENERGY_FRACTION = 1e-8


def density_from_derivatives(d: StateDerivatives, params: PhysParams) -> np.ndarray:
    return 0.5 * (d.psi ** 2 + params.b * (d.psi_x ** 2 + d.psi_y ** 2)
                  + d.phi_x ** 2 + d.phi_y ** 2 + params.a * d.phi_lap ** 2)


def energy_density(state: FieldPair, params: PhysParams) -> np.ndarray:
    return density_from_derivatives(state_derivatives(state), params)


def energy_total(state: FieldPair, params: PhysParams) -> float:
    """1/2 of the integral of |grad phi1|^2 + a (Lap phi1)^2 + phi2^2 + b |grad phi2|^2."""
    return float(np.sum(energy_density(state, params)) * state.grid.cell_area)


class EnergyFlux(BaseModel):
    density: np.ndarray
    flux_x: np.ndarray
    flux_y: np.ndarray
    density_rate: np.ndarray
    divergence: np.ndarray
    residual: float
    relative_residual: float

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def _apply(values: np.ndarray, symbol: np.ndarray, grid: Grid2D) -> np.ndarray:
    return inverse_transform(symbol * transform(values), grid)


def energy_density_flux(state: FieldPair, params: PhysParams, dealias: bool = False) -> EnergyFlux:
    """
    Pointwise density and flux, the density rate by the chain rule through the
    right-hand side, and the L2 norm of dE/dt - div F.
    """
    grid = state.grid
    d = state_derivatives(state)
    density = density_from_derivatives(d, params)

    rate = BLSystem(params, grid, dealias=dealias).physical_rate(state)
    g = rate.phi2.values
    g_spec = rate.phi2.spectrum
    g_x = inverse_transform(grid.ikx * g_spec, grid)
    g_y = inverse_transform(grid.iky * g_spec, grid)
    psi_rate_terms = d.psi * g + params.b * (d.psi_x * g_x + d.psi_y * g_y)
    # phi1 rate is psi
    phi_rate_terms = d.phi_x * d.psi_x + d.phi_y * d.psi_y + params.a * d.phi_lap * d.psi_lap
    density_rate = psi_rate_terms + phi_rate_terms

    b_inv = b_inverse_symbol(params, grid)
    b_inv_a = b_inv * a_symbol(params, grid)
    nl_spec = b_inv * transform(nonlinear_term(d))
    grad_nl_x = inverse_transform(grid.ikx * nl_spec, grid)
    grad_nl_y = inverse_transform(grid.iky * nl_spec, grid)
    flux_x = (d.psi * _apply(d.phi_x, b_inv_a, grid) + params.a * d.phi_lap * d.psi_x
              - params.b * d.psi * grad_nl_x - d.psi ** 2 * d.phi_x)
    flux_y = (d.psi * _apply(d.phi_y, b_inv_a, grid) + params.a * d.phi_lap * d.psi_y
              - params.b * d.psi * grad_nl_y - d.psi ** 2 * d.phi_y)
    divergence = inverse_transform(grid.ikx * transform(flux_x) + grid.iky * transform(flux_y), grid)

    residual = float(np.sqrt(np.sum((density_rate - divergence) ** 2) * grid.cell_area))
    scale = float(np.sqrt(np.sum(density ** 2) * grid.cell_area))
    return EnergyFlux(density=density, flux_x=flux_x, flux_y=flux_y, density_rate=density_rate,
                      divergence=divergence, residual=residual,
                      relative_residual=residual / scale if scale > 0 else 0.0)


def _relative_x(grid: Grid2D, shift: float) -> np.ndarray:
    """x - shift wrapped into [-Lx/2, Lx/2)."""
    return np.mod(grid.x - shift + 0.5 * grid.lx, grid.lx) - 0.5 * grid.lx


def seam_energy_fraction(density: np.ndarray, grid: Grid2D, shift: float, width: Optional[float] = None) -> float:
    """Share of the energy within ``width`` (default Lx/20) of the point opposite ``shift``."""
    width = 0.05 * grid.lx if width is None else width
    rel = _relative_x(grid, shift)
    band = np.abs(rel) >= 0.5 * grid.lx - width
    total = float(np.sum(np.abs(density)))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(density[:, band]))) / total


def localized_energy(state: FieldPair, params: PhysParams, alpha: float, shift: float,
                     ahead_only: bool = False, strict: bool = False) -> float:
    """
    Integral of p_alpha(x - shift) E with p_alpha(x) = 1 + tanh(alpha x), the
    weight centered on ``shift`` and wrapped to the box. ``ahead_only``
    keeps x > shift.
    """
    if alpha <= 0:
        raise BLError(Code.E0401, details={"alpha": alpha})
    grid = state.grid
    density = energy_density(state, params)
    fraction = seam_energy_fraction(density, grid, shift)
    if fraction > SEAM_ENERGY_FRACTION:
        warn_or_raise(Code.W0305, f"{fraction:.2e} of the energy sits at the seam of the weight",
                      strict, details={"shift": shift, "fraction": fraction})
    rel = _relative_x(grid, shift)
    weight = 1.0 + np.tanh(alpha * rel)
    if ahead_only:
        weight = np.where(rel > 0, weight, 0.0)
    return float(np.sum(density * weight[None, :]) * grid.cell_area)


def virial_weighted_energy(state: FieldPair, params: PhysParams, alpha: float, c1: float, t: float,
                           origin: float = 0.0, strict: bool = False) -> float:
    """The virial functional: integral of p_alpha(x - origin - c1 t) E."""
    return localized_energy(state, params, alpha, origin + c1 * t, strict=strict)


def _h1_norm(values: np.ndarray, grid: Grid2D) -> float:
    spec = transform(values)
    vx = inverse_transform(grid.ikx * spec, grid)
    vy = inverse_transform(grid.iky * spec, grid)
    return float(np.sqrt(np.sum(values ** 2 + vx ** 2 + vy ** 2) * grid.cell_area))


def weighted_initial_size(state: FieldPair, origin: float = 0.0) -> float:
    """
    ||w grad u1||_H1 + ||w u2||_H1 with w = 1 + (x - origin)^2 + y^2, the size
    of a polynomially localized perturbation.
    """
    grid = state.grid
    xx, yy = grid.mesh()
    weight = 1.0 + (xx - origin) ** 2 + yy ** 2
    d = state_derivatives(state)
    grad_part = np.sqrt(_h1_norm(weight * d.phi_x, grid) ** 2 + _h1_norm(weight * d.phi_y, grid) ** 2)
    return float(grad_part + _h1_norm(weight * state.phi2.values, grid))


class FluxSymbolReport(BaseModel):
    min_eigenvalue: float
    passed: bool


def flux_symbol_check(params: PhysParams, grid: Grid2D, tolerance: float = 1e-12) -> FluxSymbolReport:
    """
    Smallest eigenvalue over the grid modes of the Hermitian symbol
    [[1 + a|k|^2, -i d], [i d, 1 + b|k|^2]] with
    d = (1 + a|k|^2)/(1 + b|k|^2) xi/|k| + a xi |k|.
    """
    xi = np.broadcast_to(grid.kx, grid.spectral_shape)
    k2 = grid.k2
    kabs = np.sqrt(k2)
    safe = np.where(kabs > 0, kabs, 1.0)
    p = 1.0 + params.a * k2
    q = 1.0 + params.b * k2
    d = np.where(kabs > 0, p / q * xi / safe + params.a * xi * kabs, 0.0)
    lowest = 0.5 * (p + q) - np.sqrt((0.5 * (p - q)) ** 2 + d ** 2)
    value = float(np.min(lowest))
    return FluxSymbolReport(min_eigenvalue=value, passed=value >= -tolerance)
