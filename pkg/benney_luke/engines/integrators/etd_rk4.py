"""Fourth-order exponential time differencing (Cox-Matthews stages).

The phi-function coefficients are evaluated at the two eigenvalues of every
2x2 mode block by averaging over a circle of 32 points around h*lambda,
which avoids the cancellation of the closed forms near zero. The k = 0
block is nilpotent and uses the exact two-term series instead.
"""

from typing import Optional
import numpy as np
from benney_luke.common.integrator_interface import IntegratorInterface, advance_background
from benney_luke.common.logging_config import internal_logger
from benney_luke.evolution.system import apply_block, block_function
from benney_luke.spectral.fields import Background

CONTOUR_POINTS = 32
CONTOUR_RADIUS = 1.0


def _contour_coefficients(z: np.ndarray) -> tuple:
    """Contour means of Q, f1, f2, f3 (without the factor h) at the points ``z``."""
    m = np.arange(1, CONTOUR_POINTS + 1)
    circle = CONTOUR_RADIUS * np.exp(2j * np.pi * (m - 0.5) / CONTOUR_POINTS)
    zc = z[..., None] + circle
    ez = np.exp(zc)
    q = ((np.exp(zc / 2.0) - 1.0) / zc).mean(axis=-1)
    f1 = ((-4.0 - zc + ez * (4.0 - 3.0 * zc + zc ** 2)) / zc ** 3).mean(axis=-1)
    f2 = ((2.0 + zc + ez * (zc - 2.0)) / zc ** 3).mean(axis=-1)
    f3 = ((-4.0 - 3.0 * zc - zc ** 2 + ez * (4.0 - zc)) / zc ** 3).mean(axis=-1)
    return q, f1, f2, f3


def _nilpotent(h: float, g0: float, g1: float) -> np.ndarray:
    """g(h M) = g(0) I + g'(0) h M for M = [[0, 1], [0, 0]]."""
    return np.array([[g0, g1 * h], [0.0, g0]], dtype=complex)


class EtdRk4(IntegratorInterface):
    NAME = "etd-rk4"

    def __init__(self):
        self._h: Optional[float] = None
        self._coefficients: dict = {}

    def prepare(self, system, h: float) -> None:
        lam_plus, lam_minus = system.eigenvalues()
        omega = system.omega
        plus = _contour_coefficients(h * lam_plus)
        minus = _contour_coefficients(h * lam_minus)
        zero_blocks = {
            "q": _nilpotent(h, 0.5, 0.125),
            "f1": _nilpotent(h, 1.0 / 6.0, 1.0 / 6.0),
            "f2": _nilpotent(h, 1.0 / 6.0, 1.0 / 12.0),
            "f3": _nilpotent(h, 1.0 / 6.0, 0.0),
        }
        coefficients = {}
        for name, p, m in zip(("q", "f1", "f2", "f3"), plus, minus):
            coefficients[name] = h * block_function(p, m, omega, zero_blocks[name][:, :, None, None])
        coefficients["full"] = system.propagator(h)
        coefficients["half"] = system.propagator(0.5 * h)
        self._coefficients = coefficients
        self._h = h
        internal_logger.debug(f"ETD-RK4 coefficients prepared for h={h}")

    def step(self, system, u: np.ndarray, background: Optional[Background], h: float) -> np.ndarray:
        if self._h != h:
            self.prepare(system, h)
        co = self._coefficients
        mid = advance_background(background, 0.5 * h)
        end = advance_background(background, h)

        nu = system.explicit(u, background)
        half_u = apply_block(co["half"], u)
        a = half_u + apply_block(co["q"], nu)
        na = system.explicit(a, mid)
        b = half_u + apply_block(co["q"], na)
        nb = system.explicit(b, mid)
        c = apply_block(co["half"], a) + apply_block(co["q"], 2.0 * nb - nu)
        nc = system.explicit(c, end)

        return (apply_block(co["full"], u) + apply_block(co["f1"], nu)
                + 2.0 * apply_block(co["f2"], na + nb) + apply_block(co["f3"], nc))
