"""Initial perturbations U0 = (u01, u02) added to a line soliton.

``localized_bump``  polynomially localized potential bump placed ahead
                    of the crest, u02 = 0.
``resonant_mode``   U0 = -eps zeta2_c0(z) g(y) with g the inverse Fourier
                    transform of the chi cutoff: a band-limited local
                    change of speed along the crest.
``none``            U0 = 0.

Perturbations are periodic samples without a kink background.
"""

from typing import Callable, Dict, Optional
import numpy as np
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PerturbationSpec, PhysParams
from benney_luke.modulation.cutoffs import chi
from benney_luke.soliton.profile import soliton_profile
from benney_luke.soliton.psi_correction import PsiCorrection
from benney_luke.spectral.fields import FieldPair
from benney_luke.spectral.grid import Grid2D


def localized_bump(grid: Grid2D, params: PhysParams, c0: float, spec: PerturbationSpec,
                   eta0: Optional[float] = None, origin: float = 0.0, h: float = 10.0) -> FieldPair:
    """u01 = eps (1 + ((x - origin - offset)/wx)^2 + (y/wy)^2)^-2."""
    xx, yy = grid.mesh()
    radius2 = ((xx - origin - spec.offset) / spec.width_x) ** 2 + (yy / spec.width_y) ** 2
    return FieldPair.from_arrays(grid, spec.epsilon / (1.0 + radius2) ** 2, np.zeros(grid.shape))


def band_profile(grid: Grid2D, eta0: float) -> np.ndarray:
    """g(y) = (1 / 2 pi) int chi(eta) e^{i eta y} d eta, summed over the box modes; even about y = 0."""
    return (np.cos(np.outer(grid.y, grid.eta)) @ chi(grid.eta, eta0)) / grid.ly


def resonant_mode(grid: Grid2D, params: PhysParams, c0: float, spec: PerturbationSpec,
                  eta0: Optional[float] = None, origin: float = 0.0, h: float = 10.0) -> FieldPair:
    """
    -eps zeta2_c0(x - origin) g(y). The plateau of d_c phi_c behind the
    crest is removed with the c-derivative of the psi correction, so the
    samples stay periodic in x.
    """
    if eta0 is None:
        raise BLError(Code.E0504, message="the resonant-mode perturbation needs eta0")
    profile = soliton_profile(params, c0)
    z = grid.x - origin
    psi = PsiCorrection(params=params, c0=c0, h=h)
    first = profile.phi(z, dc=1) - psi.psi_tilde(z + h, c=c0, dc=1)
    second = profile.r(z, dc=1)
    g = spec.epsilon * band_profile(grid, eta0)
    return FieldPair.from_arrays(grid, g[:, None] * first[None, :], g[:, None] * second[None, :])


def no_perturbation(grid: Grid2D, params: PhysParams, c0: float, spec: PerturbationSpec,
                    eta0: Optional[float] = None, origin: float = 0.0, h: float = 10.0) -> FieldPair:
    return FieldPair.zeros(grid)


SCENARIOS: Dict[str, Callable[..., FieldPair]] = {
    "localized_bump": localized_bump,
    "resonant_mode": resonant_mode,
    "none": no_perturbation,
}


def build_perturbation(grid: Grid2D, params: PhysParams, c0: float, spec: PerturbationSpec,
                       eta0: Optional[float] = None, origin: float = 0.0, h: float = 10.0) -> FieldPair:
    builder = SCENARIOS.get(spec.kind)
    if builder is None:
        raise BLError(Code.E0601, message=f"unknown perturbation kind '{spec.kind}'")
    internal_logger.debug(f"Building '{spec.kind}' perturbation with eps={spec.epsilon}")
    return builder(grid, params, c0, spec, eta0=eta0, origin=origin, h=h)
