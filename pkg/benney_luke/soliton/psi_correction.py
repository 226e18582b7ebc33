from functools import lru_cache
from typing import Optional
import numpy as np
from scipy import integrate
from pydantic import BaseModel, model_validator
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import PhysParams
from benney_luke.soliton.jets import Jet
from benney_luke.soliton.profile import beta_jet, check_speed

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(48)


def _bump(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def mollifier_constant() -> float:
    """C such that C exp(-1/(1-x^2)) has unit mass on (-1, 1)."""
    mass, _ = integrate.quad(lambda s: np.exp(-1.0 / (1.0 - s * s)) if abs(s) < 1.0 else 0.0,
                             -1.0, 1.0, epsabs=1e-14, epsrel=1e-14, limit=200)
    return 1.0 / mass


def mollifier(x) -> np.ndarray:
    return mollifier_constant() * _bump(x)


def mollifier_tail(z) -> np.ndarray:
    """Integral of the mollifier from z to infinity."""
    z = np.asarray(z, dtype=float)
    out = np.where(z <= -1.0, 1.0, 0.0)
    inside = np.abs(z) < 1.0
    if np.any(inside):
        zi = z[inside]
        # Gauss-Legendre on [-1, z]; the integrand is flat to all orders at -1
        half = 0.5 * (zi + 1.0)
        s = -1.0 + half[:, None] * (_NODES[None, :] + 1.0)
        head = half * (mollifier(s) @ _WEIGHTS)
        out[inside] = 1.0 - head
    return out


class PsiCorrection(BaseModel):
    """
    Psi_c = (psi_tilde_c, 0) with psi_tilde_c(z1) the tail integral of
    psi_c = 2 (beta(c0) - beta(c)) psi, evaluated at z1 = z + (c0 - 1) t / 2 + h.
    ``c`` may vary along the crest through the array-valued helpers.
    """
    params: PhysParams
    c0: float
    c: Optional[float] = None
    h: float = 10.0

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check(self) -> "PsiCorrection":
        if self.h < 0:
            raise BLError(Code.E0203, details={"h": self.h})
        check_speed(self.params, self.c0)
        if self.c is not None:
            check_speed(self.params, self.c)
        return self

    def offset(self, t: float = 0.0) -> float:
        return 0.5 * (self.c0 - 1.0) * t + self.h

    def _speed(self, c):
        if c is None:
            if self.c is None:
                raise BLError(Code.E0201, message="no speed given for the correction")
            return self.c
        return c

    def amplitude_jet(self, c=None) -> Jet:
        """Jet in c of 2 (beta(c0) - beta(c))."""
        c = self._speed(c)
        beta0 = float(beta_jet(self.params, self.c0).v)
        return 2.0 * (beta0 - beta_jet(self.params, c))

    def psi(self, x, c=None) -> np.ndarray:
        return np.asarray(self.amplitude_jet(c).v) * mollifier(x)

    def psi_tilde(self, z1, c=None, dc: int = 0) -> np.ndarray:
        """psi_tilde_c(z1), or its ``dc``-th c-derivative."""
        return np.asarray(self.amplitude_jet(c).component(dc)) * mollifier_tail(z1)

    def plateau(self, c=None) -> float:
        """Value of psi_tilde_c at -infinity, equal to minus the integral of q_c - q_c0."""
        return float(np.asarray(self.amplitude_jet(c).v))


def psi_correction(params: PhysParams, c0: float, c: Optional[float] = None, h: float = 10.0) -> PsiCorrection:
    return PsiCorrection(params=params, c0=c0, c=c, h=h)
