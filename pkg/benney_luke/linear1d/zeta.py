"""Generalized kernel of L_c(0) and of its adjoint.

    zeta1  = (q_c, r_c')                      L_c(0) zeta1 = 0
    zeta2  = -(d_c phi_c, d_c r_c)            L_c(0) zeta2 = zeta1
    zeta1* = c (-B0 d_c r_c - 2 q_c d_c q_c - q_c' d_c phi*_c, B0 d_c phi*_c)
    zeta2* = (A0 q_c', -B0 r_c)

with phi*_c = phi_c + 2 beta(c). The pairings satisfy <zeta1, zeta2*> = 0,
<zeta1, zeta1*> = <zeta2, zeta2*> = beta1 > 0 and <zeta2, zeta1*> = beta2 > 0.
"""

from typing import Dict, Optional
import numpy as np
from pydantic import BaseModel
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PhysParams
from benney_luke.soliton.profile import SolitonProfile, beta_jet, phi_jet, r_jet, soliton_profile
from benney_luke.linear1d.grid1d import Grid1D, VectorPair1D, grid1d_for

ORTHOGONALITY_TOLERANCE = 1e-8
PAIRING_TOLERANCE = 1e-6


class ZetaBasis(BaseModel):
    c: float
    zeta1: VectorPair1D
    zeta2: VectorPair1D
    zeta1_star: VectorPair1D
    zeta2_star: VectorPair1D
    pairings: Dict[str, float]

    model_config = {"frozen": True}

    @property
    def grid(self) -> Grid1D:
        return self.zeta1.grid

    @property
    def beta1(self) -> float:
        return self.pairings["z1_z1s"]

    @property
    def beta2(self) -> float:
        return self.pairings["z2_z1s"]

    def kernel(self, j: int) -> VectorPair1D:
        return (self.zeta1, self.zeta2)[j - 1]

    def adjoint(self, k: int) -> VectorPair1D:
        return (self.zeta1_star, self.zeta2_star)[k - 1]


def adjoint_functions(params: PhysParams, c, z) -> dict:
    """
    zeta1* and zeta2* as (first, second) samples for speeds ``c``
    broadcastable against ``z``, so the speed may vary along the crest.
    """
    a, b = params.a, params.b
    c = np.asarray(c, dtype=float)
    q, q1, q3 = (phi_jet(params, c, z, order) for order in (1, 2, 4))
    r, r2 = r_jet(params, c, z), r_jet(params, c, z, 2)
    dphi_star = (phi_jet(params, c, z) + 2.0 * beta_jet(params, c)).d1
    return {
        "zeta1_star": (c * (-(r.d1 - b * r2.d1) - 2.0 * q.v * q.d1 - q1.v * dphi_star),
                       c * (dphi_star - b * q1.d1)),
        "zeta2_star": (q1.v - a * q3.v, -(r.v - b * r2.v)),
    }


def zeta_functions(profile: SolitonProfile, z) -> dict:
    """Physical samples of the four functions as (first, second) tuples."""
    return {
        "zeta1": (profile.q(z), profile.r(z, 1)),
        "zeta2": (-profile.phi(z, dc=1), -profile.r(z, dc=1)),
        **adjoint_functions(profile.params, profile.c, z),
    }


def zeta_basis(params: PhysParams, c: float, grid: Optional[Grid1D] = None,
               tolerance: float = PAIRING_TOLERANCE) -> ZetaBasis:
    """
    Sample the basis on ``grid`` (default ``grid1d_for`` the profile) and
    check its pairings: E0403 when they break, E0402 when beta1 or beta2
    is not positive.
    """
    profile = soliton_profile(params, c)
    grid = grid or grid1d_for(profile)
    grid.check_tails(profile)
    samples = zeta_functions(profile, grid.z)
    kernel = {name: VectorPair1D.from_physical(grid, *samples[name], rate=1) for name in ("zeta1", "zeta2")}
    adjoint = {name: VectorPair1D.from_physical(grid, *samples[name], rate=-1)
               for name in ("zeta1_star", "zeta2_star")}

    pairings = {}
    for j, left in ((1, kernel["zeta1"]), (2, kernel["zeta2"])):
        for k, right in ((1, adjoint["zeta1_star"]), (2, adjoint["zeta2_star"])):
            pairings[f"z{j}_z{k}s"] = left.pair(right).real

    orthogonality = abs(pairings["z1_z2s"]) / (kernel["zeta1"].norm() * adjoint["zeta2_star"].norm())
    beta1 = pairings["z1_z1s"]
    spread = abs(beta1 - pairings["z2_z2s"]) / max(abs(beta1), np.finfo(float).tiny)
    details = {"c": c, "pairings": pairings, "orthogonality": orthogonality, "spread": spread}
    if orthogonality > ORTHOGONALITY_TOLERANCE or spread > tolerance:
        raise BLError(Code.E0403, details=details)
    if beta1 <= 0 or pairings["z2_z1s"] <= 0:
        raise BLError(Code.E0402, message="beta1 and beta2 must be positive", details=details)
    internal_logger.debug(f"zeta basis at c={c}: beta1={beta1:.12e} beta2={pairings['z2_z1s']:.12e}")
    return ZetaBasis(c=c, pairings=pairings, **kernel, **adjoint)
