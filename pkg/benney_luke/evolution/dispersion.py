from typing import List
import numpy as np
from pydantic import BaseModel
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PhysParams
from benney_luke.spectral.grid import Grid2D
from benney_luke.spectral.multipliers import omega_squared
from benney_luke.evolution.energy import flux_symbol_check

GROUP_SPEED_TOLERANCE = 1e-12


def omega(params: PhysParams, xi, eta) -> np.ndarray:
    return np.sqrt(omega_squared(params, np.asarray(xi) ** 2 + np.asarray(eta) ** 2))


def _f_prime(params: PhysParams, s: np.ndarray) -> np.ndarray:
    """Derivative of F(s) = s (1 + a s) / (1 + b s)."""
    a, b = params.a, params.b
    return (1.0 + 2.0 * a * s + a * b * s ** 2) / (1.0 + b * s) ** 2


def group_velocity(params: PhysParams, xi, eta) -> tuple:
    """
    Analytic gradient of omega: (xi, eta) F'(|k|^2) / omega, continued by
    (xi, eta)/|k| at the origin, where omega is not differentiable.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    s = xi ** 2 + eta ** 2
    w = omega(params, xi, eta)
    safe = np.where(w > 0, w, 1.0)
    scale = np.where(w > 0, _f_prime(params, s) / safe, 0.0)
    return xi * scale, eta * scale


def group_speed(params: PhysParams, k2) -> np.ndarray:
    """|grad omega| = F'(s) sqrt((1 + b s)/(1 + a s)), equal to 1 at s = 0."""
    s = np.asarray(k2, dtype=float)
    return _f_prime(params, s) * np.sqrt((1.0 + params.b * s) / (1.0 + params.a * s))


class DispersionReport(BaseModel):
    omega_unit_x: float
    max_group_speed: float
    long_wave_group_speed: float
    max_parallel_defect: float
    flux_symbol_min_eigenvalue: float
    passed: bool
    violations: List[str] = []


def dispersion_check(params: PhysParams, grid: Grid2D, strict: bool = False) -> DispersionReport:
    """
    Check |grad omega| <= 1 and grad omega parallel to (xi, eta) over every
    grid mode, together with the positivity of the flux symbol.
    """
    xi = np.broadcast_to(grid.kx, grid.spectral_shape)
    eta = np.broadcast_to(grid.ky, grid.spectral_shape)
    gx, gy = group_velocity(params, xi, eta)
    speed = np.hypot(gx, gy)
    nonzero = grid.k2 > 0
    max_speed = float(np.max(speed[nonzero]))
    cross = float(np.max(np.abs(xi * gy - eta * gx)))
    flux = flux_symbol_check(params, grid)

    violations = []
    if max_speed > 1.0 + GROUP_SPEED_TOLERANCE:
        violations.append(f"max |grad omega| = {max_speed:.15f} exceeds 1")
    if cross > GROUP_SPEED_TOLERANCE:
        violations.append(f"grad omega deviates from (xi, eta) by {cross:.3e}")
    if not flux.passed:
        violations.append(f"flux symbol has eigenvalue {flux.min_eigenvalue:.3e}")

    report = DispersionReport(
        omega_unit_x=float(omega(params, 1.0, 0.0)),
        max_group_speed=max_speed,
        long_wave_group_speed=float(group_speed(params, 0.0)),
        max_parallel_defect=cross,
        flux_symbol_min_eigenvalue=flux.min_eigenvalue,
        passed=not violations,
        violations=violations,
    )
    if violations:
        error = BLError(Code.E0306, message="; ".join(violations), details=report.model_dump())
        if strict:
            raise error
        error.log(use_rich=False)
    else:
        internal_logger.debug(f"Dispersion check passed: max |grad omega| = {max_speed:.15f}")
    return report
