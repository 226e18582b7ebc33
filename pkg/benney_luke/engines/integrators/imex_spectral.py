"""Integrating-factor RK4: the linear block is propagated exactly, the
explicit part by the classical four-stage scheme in the rotated variables."""

from typing import Optional
import numpy as np
from benney_luke.common.integrator_interface import IntegratorInterface, advance_background
from benney_luke.evolution.system import apply_block
from benney_luke.spectral.fields import Background


class ImexSpectral(IntegratorInterface):
    NAME = "imex-spectral"

    def __init__(self):
        self._h: Optional[float] = None
        self._full: Optional[np.ndarray] = None
        self._half: Optional[np.ndarray] = None

    def prepare(self, system, h: float) -> None:
        self._h = h
        self._full = system.propagator(h)
        self._half = system.propagator(0.5 * h)

    def step(self, system, u: np.ndarray, background: Optional[Background], h: float) -> np.ndarray:
        if self._h != h:
            self.prepare(system, h)
        full, half = self._full, self._half
        mid = advance_background(background, 0.5 * h)
        end = advance_background(background, h)

        k1 = system.explicit(u, background)
        k2 = system.explicit(apply_block(half, u + 0.5 * h * k1), mid)
        half_u = apply_block(half, u)
        k3 = system.explicit(half_u + 0.5 * h * k2, mid)
        k4 = system.explicit(apply_block(full, u) + h * apply_block(half, k3), end)

        return apply_block(full, u) + (h / 6.0) * (
            apply_block(full, k1) + 2.0 * apply_block(half, k2 + k3) + k4)
