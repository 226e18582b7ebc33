from typing import Optional
import numpy as np
from pydantic import BaseModel, model_validator
from benney_luke.common.error import BLError, Code, warn_or_raise
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PhysParams
from benney_luke.soliton.profile import SolitonProfile, phi_jet, check_speed
from benney_luke.spectral.fields import FieldPair, seam_tail
from benney_luke.spectral.grid import Grid2D

SEAM_TOLERANCE = 1e-8


class KinkBackground(BaseModel):
    """
    Theta(x) = phi_c(x - offset): the x-only, non-periodic part of a line
    soliton potential. ``drift`` is the speed of the kink relative to the
    frame the state is stored in.
    """
    params: PhysParams
    speed: float
    offset: float = 0.0
    drift: float = 0.0

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_speed(self) -> "KinkBackground":
        check_speed(self.params, self.speed)
        return self

    def sample(self, x: np.ndarray, order: int = 0) -> np.ndarray:
        return np.asarray(phi_jet(self.params, self.speed, np.asarray(x) - self.offset, order).v)

    def advanced(self, dt: float) -> "KinkBackground":
        """The same kink after ``dt`` time units in the storage frame."""
        if self.drift == 0.0:
            return self
        return self.model_copy(update={"offset": self.offset + self.drift * dt})

    def in_frame(self, frame_speed: float) -> "KinkBackground":
        return self.model_copy(update={"drift": self.speed - frame_speed})


def check_seam(grid: Grid2D, profile: SolitonProfile, offset: float, strict: bool) -> Optional[BLError]:
    """Warn (or raise when ``strict``) if the soliton tails reach the x-seam."""
    edges = np.array([grid.x[0], grid.x[-1] + grid.dx]) - offset
    tail = float(np.max(np.abs(profile.q(edges))))
    if tail > SEAM_TOLERANCE:
        return warn_or_raise(Code.W0202, f"soliton tail {tail:.3e} at the x-seam exceeds {SEAM_TOLERANCE:.0e}",
                             strict, details={"tail": tail, "lx": grid.lx, "alpha": profile.alpha})
    return None


def line_wave_field(grid: Grid2D, profile: SolitonProfile, theta: float = 0.0, gamma: float = 0.0,
                    t: float = 0.0, strict: bool = False) -> FieldPair:
    """
    Sample phi_c(x cos(theta) + y sin(theta) - c t + gamma) and its time
    derivative r_c. For theta = 0 the potential is carried by a kink
    background and the periodic part of phi1 is zero.
    """
    c = profile.c
    if theta == 0.0:
        offset = c * t - gamma
        check_seam(grid, profile, offset, strict)
        background = KinkBackground(params=profile.params, speed=c, offset=offset)
        phi2 = np.broadcast_to(profile.r(grid.x - offset)[None, :], grid.shape)
        return FieldPair.from_arrays(grid, np.zeros(grid.shape), phi2, background)

    xx, yy = grid.mesh()
    arg = xx * np.cos(theta) + yy * np.sin(theta) - c * t + gamma
    phi1 = profile.phi(arg)
    phi2 = profile.r(arg)
    tail = max(seam_tail(phi1), float(np.max(np.abs(phi1[[0, -1], :]))))
    if tail > SEAM_TOLERANCE:
        warn_or_raise(Code.W0202, f"oblique soliton is not periodic on the box (seam value {tail:.3e})",
                      strict, details={"theta": theta})
    internal_logger.debug(f"Sampled oblique line wave c={c}, theta={theta}")
    return FieldPair.from_arrays(grid, phi1, phi2)
