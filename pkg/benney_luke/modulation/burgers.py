"""Self-similar Burgers profiles of the diagonalized modulation pair.

    u±(t, y) = ±(lambda2 / p3) m± H(y) / (1 + m± int_0^y H),   H = H_{lambda2 t}

solves d_t u = lambda2 u_yy ± p3 (u^2)_y and carries the mass
±(lambda2 / p3) log((2 + m±) / (2 - m±)); inverted in closed form,
m± = ±2 tanh(mass p3 / (2 lambda2)). With s = mass p3 / (2 lambda2) the
prefactor equals mass tanh(s) / s, so p3 -> 0 continues to mass H.
"""

from typing import Optional, Tuple
import numpy as np
from pydantic import BaseModel
from scipy.special import erf
from benney_luke.common.error import BLError, Code
from benney_luke.linear1d.coefficients import ModulationCoefficients
from benney_luke.modulation.semigroup import heat_kernel

P3_FLOOR = 1e-14
SATURATION = 1e-12


def _tanhc(s: float) -> float:
    return 1.0 if s == 0.0 else float(np.tanh(s) / s)


def burgers_mass_to_m(mass: float, sign: int, lambda2: float, p3: float) -> float:
    """m± for a given mass; in the heat limit |p3| -> 0 the amplitude m = mass is returned."""
    if not np.isfinite(mass):
        raise BLError(Code.E0505, details={"mass": mass})
    if abs(p3) <= P3_FLOOR * lambda2:
        return float(mass)
    m = sign * 2.0 * np.tanh(mass * p3 / (2.0 * lambda2))
    if 2.0 - abs(m) <= SATURATION:
        raise BLError(Code.E0505, message="mass saturates |m| = 2 in double precision",
                      details={"mass": mass, "p3": p3, "lambda2": lambda2})
    return float(m)


def m_to_mass(m: float, sign: int, lambda2: float, p3: float) -> float:
    if abs(p3) <= P3_FLOOR * lambda2:
        return float(m)
    if not abs(m) < 2.0:
        raise BLError(Code.E0505, message="|m| < 2 required", details={"m": m})
    return float(sign * lambda2 / p3 * np.log((2.0 + m) / (2.0 - m)))


class BurgersProfile(BaseModel):
    lambda1: float
    lambda2: float
    p3: float
    mass_plus: float
    mass_minus: float

    model_config = {"frozen": True}

    @property
    def m_plus(self) -> float:
        return burgers_mass_to_m(self.mass_plus, 1, self.lambda2, self.p3)

    @property
    def m_minus(self) -> float:
        return burgers_mass_to_m(self.mass_minus, -1, self.lambda2, self.p3)

    def _evaluate(self, t: float, y, mass: float, sign: int) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        tau = self.lambda2 * t
        if abs(self.p3) <= P3_FLOOR * self.lambda2:
            return mass * heat_kernel(tau, y)
        s = mass * self.p3 / (2.0 * self.lambda2)
        m = burgers_mass_to_m(mass, sign, self.lambda2, self.p3)
        primitive = 0.5 * erf(y / (2.0 * np.sqrt(tau)))
        return mass * _tanhc(s) * heat_kernel(tau, y) / (1.0 + m * primitive)

    def u_plus(self, t: float, y) -> np.ndarray:
        return self._evaluate(t, y, self.mass_plus, 1)

    def u_minus(self, t: float, y) -> np.ndarray:
        return self._evaluate(t, y, self.mass_minus, -1)

    def pair(self, t: float, y) -> np.ndarray:
        """The two-wave form of (gamma_y, c~): u+ centered at -lambda1 t, u- at +lambda1 t."""
        y = np.asarray(y, dtype=float)
        plus = self.u_plus(t, y + self.lambda1 * t)
        minus = self.u_minus(t, y - self.lambda1 * t)
        return np.stack([plus - minus, self.lambda1 * (plus + minus)])


def burgers_profile(coeffs: ModulationCoefficients, mass_plus: float, mass_minus: float) -> BurgersProfile:
    profile = BurgersProfile(lambda1=coeffs.lambda1, lambda2=coeffs.lambda2, p3=coeffs.p3,
                             mass_plus=mass_plus, mass_minus=mass_minus)
    # resolve m± eagerly so unattainable masses fail here
    _ = (profile.m_plus, profile.m_minus)
    return profile


def diagonal_masses(gamma_y: np.ndarray, c_tilde: np.ndarray, lambda1: float, dy: float) -> Tuple[float, float]:
    """Masses of d± with (gamma_y, c~) = [[1, -1], [lambda1, lambda1]] (d+, d-)."""
    d_plus = 0.5 * (gamma_y + c_tilde / lambda1)
    d_minus = 0.5 * (c_tilde / lambda1 - gamma_y)
    return float(np.sum(d_plus) * dy), float(np.sum(d_minus) * dy)


def profile_mismatch(gamma_y: np.ndarray, c_tilde: np.ndarray, coeffs: ModulationCoefficients, t: float,
                     y: np.ndarray, masses: Optional[Tuple[float, float]] = None) -> float:
    """
    Relative L2 distance of (gamma_y, c~) to the Burgers two-wave form at
    time ``t``; masses default to those of the data.
    """
    y = np.asarray(y, dtype=float)
    dy = float(y[1] - y[0])
    masses = masses or diagonal_masses(gamma_y, c_tilde, coeffs.lambda1, dy)
    predicted = burgers_profile(coeffs, *masses).pair(t, y)
    data = np.stack([gamma_y, c_tilde])
    scale = np.sqrt(np.sum(data ** 2))
    if scale == 0.0:
        return 0.0
    return float(np.sqrt(np.sum((data - predicted) ** 2)) / scale)
