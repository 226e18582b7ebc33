"""Closed-form line solitary waves.

For speed c > 1 the potential is phi_c(z) = beta (tanh(k z) - 1) with
k = alpha_c / 2, alpha_c = sqrt((c^2 - 1) / (b c^2 - a)) and
beta = 2 (c^2 - 1) / (c alpha_c); q_c = phi_c' = A sech^2(k z) with
A = (c^2 - 1) / c, and r_c = -c q_c. The n-th z-derivative of phi_c is
beta k^n P_n(tanh(k z)) with P_0 = T - 1 and P_{n+1} = P_n'(T) (1 - T^2).

The module-level helpers accept arrays of speeds broadcastable against z,
which the decomposition uses for a speed that varies along the crest.
"""

from functools import cached_property, lru_cache
from typing import Tuple
import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, model_validator
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import PhysParams
from benney_luke.soliton.jets import Jet, jpolyval, jsqrt, jtanh

MAX_Z_ORDER = 6


@lru_cache(maxsize=1)
def _tanh_polynomials() -> Tuple[np.ndarray, ...]:
    one_minus_t2 = Polynomial([1.0, 0.0, -1.0])
    polys = [Polynomial([-1.0, 1.0])]
    for _ in range(MAX_Z_ORDER):
        polys.append(polys[-1].deriv() * one_minus_t2)
    return tuple(p.coef.copy() for p in polys)


def check_speed(params: PhysParams, c) -> None:
    c_arr = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c_arr)) or np.any(np.abs(c_arr) <= 1.0) \
            or np.any(params.b * c_arr ** 2 - params.a <= 0):
        raise BLError(Code.E0201, details={"c": c_arr.tolist(), "a": params.a, "b": params.b})


def coefficient_jets(params: PhysParams, c) -> dict:
    """Jets of alpha, k, beta and A at |c| (arrays allowed)."""
    cj = Jet.variable(np.abs(np.asarray(c, dtype=float)))
    c2 = cj * cj
    alpha = jsqrt((c2 - 1.0) / (params.b * c2 - params.a))
    beta = 2.0 * (c2 - 1.0) / (cj * alpha)
    return {"alpha": alpha, "k": 0.5 * alpha, "beta": beta, "amplitude": (c2 - 1.0) / cj}


def _signed(jet: Jet, sign) -> Jet:
    # odd in c: F(c) = s F(|c|), so d/dc keeps its sign and d2/dc2 flips with s
    return Jet(sign * jet.v, jet.d1, sign * jet.d2)


def beta_jet(params: PhysParams, c) -> Jet:
    return _signed(coefficient_jets(params, c)["beta"], np.sign(c))


def phi_jet(params: PhysParams, c, z, order: int = 0) -> Jet:
    """Jet in c of the ``order``-th z-derivative of phi_c at ``z``."""
    if order > MAX_Z_ORDER:
        raise ValueError(f"z-derivatives above order {MAX_Z_ORDER} are not tabulated")
    coef = coefficient_jets(params, c)
    t = jtanh(coef["k"] * np.asarray(z, dtype=float))
    scale = coef["beta"]
    for _ in range(order):
        scale = scale * coef["k"]
    return _signed(scale * jpolyval(_tanh_polynomials()[order], t), np.sign(c))


def r_jet(params: PhysParams, c, z, order: int = 0) -> Jet:
    return -Jet.variable(np.asarray(c, dtype=float)) * phi_jet(params, c, z, order + 1)


class SolitonProfile(BaseModel):
    """Evaluators for phi_c, q_c, r_c and their z- and c-derivatives."""
    params: PhysParams
    c: float

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_speed(self) -> "SolitonProfile":
        check_speed(self.params, self.c)
        return self

    @property
    def sign(self) -> float:
        return 1.0 if self.c > 0 else -1.0

    @cached_property
    def _coefficients(self) -> dict:
        return coefficient_jets(self.params, self.c)

    @property
    def alpha(self) -> float:
        return float(self._coefficients["alpha"].v)

    @property
    def k(self) -> float:
        return float(self._coefficients["k"].v)

    @property
    def beta(self) -> float:
        """Half the jump of phi_c across the wave (signed for c < -1)."""
        return float(self.sign * self._coefficients["beta"].v)

    @property
    def amplitude(self) -> float:
        """q_c(0)."""
        return float(self.sign * self._coefficients["amplitude"].v)

    def beta_jet(self) -> Jet:
        return beta_jet(self.params, self.c)

    def alpha_jet(self) -> Jet:
        alpha = self._coefficients["alpha"]
        return Jet(alpha.v, self.sign * alpha.d1, alpha.d2)

    def phi_jet(self, z, order: int = 0) -> Jet:
        return phi_jet(self.params, self.c, z, order)

    def phi(self, z, order: int = 0, dc: int = 0) -> np.ndarray:
        """``order``-th z-derivative of phi_c, differentiated ``dc`` times in c."""
        return np.asarray(self.phi_jet(z, order).component(dc))

    def q(self, z, order: int = 0, dc: int = 0) -> np.ndarray:
        return self.phi(z, order + 1, dc)

    def r_jet(self, z, order: int = 0) -> Jet:
        return r_jet(self.params, self.c, z, order)

    def r(self, z, order: int = 0, dc: int = 0) -> np.ndarray:
        return np.asarray(self.r_jet(z, order).component(dc))

    def phi_star_jet(self, z) -> Jet:
        """phi_c + 2 beta(c), the potential shifted to vanish at -infinity."""
        return self.phi_jet(z) + 2.0 * self.beta_jet()

    def phi_star(self, z, dc: int = 0) -> np.ndarray:
        return np.asarray(self.phi_star_jet(z).component(dc))

    def residual(self, z) -> np.ndarray:
        """Residual of (b c^2 - a) q'' - (c^2 - 1) q + (3c/2) q^2."""
        a, b, c = self.params.a, self.params.b, self.c
        q = self.q(z)
        return (b * c ** 2 - a) * self.q(z, 2) - (c ** 2 - 1.0) * q + 1.5 * c * q ** 2

    def energy_1d(self) -> float:
        """The pair energy: integral of q^2 + a q'^2 + r^2 + b r'^2 over the line."""
        a, b, c = self.params.a, self.params.b, self.c
        amp2 = self.amplitude ** 2
        return float(amp2 * ((1.0 + c ** 2) * 4.0 / (3.0 * self.k) + (a + b * c ** 2) * 16.0 * self.k / 15.0))

    def tail(self, distance: float) -> float:
        """Bound on |q_c| at distance ``distance`` from the crest."""
        return float(4.0 * abs(self.amplitude) * np.exp(-self.alpha * distance))


def soliton_profile(params: PhysParams, c: float) -> SolitonProfile:
    return SolitonProfile(params=params, c=c)


def energy_1d(profile: SolitonProfile) -> float:
    return profile.energy_1d()
