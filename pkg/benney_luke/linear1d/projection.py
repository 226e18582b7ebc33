"""Real projection pair onto the resonant modes.

With zeta, zeta* the normalized resonant eigenfunctions at eta and
<zeta, zeta*> = R + iI,

    g      = (1 + i R / I) zeta,            kappa = (I + R^2 / I) / 2
    g1     = Re g / beta1,                  g2    = Im g / kappa
    g1*    = -(beta1 / kappa) Im zeta*,     g2*   = Re zeta*

so that <g_j, g_k*> = delta_jk. The pair is even in eta and tends to the
zeta basis as eta -> 0.
"""

from typing import Optional
import numpy as np
from pydantic import BaseModel
from benney_luke.common.error import BLError, Code, warn_or_raise
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PhysParams
from benney_luke.soliton.profile import soliton_profile
from benney_luke.spectral.fields import FieldPair
from benney_luke.linear1d.coefficients import ModulationCoefficients, coefficient_core, resonant_rates
from benney_luke.linear1d.eigencurve import resonant_mode
from benney_luke.linear1d.grid1d import Grid1D, VectorPair1D, grid1d_for
from benney_luke.linear1d.operator import LinearizedBL
from benney_luke.linear1d.zeta import ZetaBasis, zeta_basis, zeta_functions

KAPPA_FLOOR = 1e-8


class ProjectionPair(BaseModel):
    c: float
    eta: float
    value: complex
    kappa: float
    g1: VectorPair1D
    g2: VectorPair1D
    g1_star: VectorPair1D
    g2_star: VectorPair1D
    fallback: bool = False

    model_config = {"frozen": True}

    @property
    def grid(self) -> Grid1D:
        return self.g1.grid

    def kernel(self, j: int) -> VectorPair1D:
        return (self.g1, self.g2)[j - 1]

    def adjoint(self, k: int) -> VectorPair1D:
        return (self.g1_star, self.g2_star)[k - 1]

    def biorthogonality(self) -> np.ndarray:
        """The 2x2 matrix <g_j, g_k*>."""
        return np.array([[self.kernel(j).pair(self.adjoint(k)).real for k in (1, 2)] for j in (1, 2)])

    def components(self, w: VectorPair1D) -> tuple:
        return tuple(w.pair(self.adjoint(k)).real for k in (1, 2))

    def adjoint_on(self, points: np.ndarray, k: int) -> np.ndarray:
        """
        Physical samples (2, len(points)) of g_k* at arbitrary z in [-L, L].
        Accuracy degrades like exp(alpha |z|) towards the +L edge.
        """
        points = np.asarray(points, dtype=float)
        grid = self.grid
        if points.size and (points.min() < -grid.length or points.max() > grid.length):
            raise BLError(Code.E0407, message="adjoint samples requested outside the 1D box",
                          details={"length": grid.length, "range": [float(points.min()), float(points.max())]})
        star = self.adjoint(k)
        return grid.interpolate(star.values, points) * np.exp(-star.rate * grid.alpha * points)


def basis_pair(basis: ZetaBasis, eta: float) -> ProjectionPair:
    """The eta = 0 pair built from the zeta basis, tagged with ``eta``."""
    beta1, beta2 = basis.beta1, basis.beta2
    return ProjectionPair(
        c=basis.c, eta=eta, value=0j, kappa=0.0,
        g1=basis.zeta1.scaled(1.0 / beta1),
        g2=(basis.zeta2 - basis.zeta1.scaled(beta2 / beta1)).scaled(1.0 / beta1),
        g1_star=basis.zeta1_star, g2_star=basis.zeta2_star, fallback=True)


def projection_pair(params: PhysParams, c: float, eta: float, grid: Optional[Grid1D] = None,
                    basis: Optional[ZetaBasis] = None, coeffs: Optional[ModulationCoefficients] = None,
                    strict: bool = True) -> ProjectionPair:
    """
    Build g1, g2, g1*, g2* at ``eta``. At eta = 0, or when |kappa| falls
    below KAPPA_FLOOR * beta1, the zeta basis is used instead (W0406, or
    E0406 when ``strict``; eta = 0 is silent).
    """
    profile = soliton_profile(params, c)
    grid = grid or grid1d_for(profile)
    basis = basis or zeta_basis(params, c, grid)
    if eta == 0.0:
        return basis_pair(basis, 0.0)
    if coeffs is not None:
        lambda1, lambda2 = coeffs.lambda1, coeffs.lambda2
    else:
        lambda1, lambda2 = resonant_rates(coefficient_core(params, c, grid, basis))
    mode = resonant_mode(LinearizedBL(params, profile, grid), basis, float(eta), lambda1, lambda2,
                         vectors=True, strict=True)
    zeta, zeta_star = mode.zeta, mode.zeta_star
    product = zeta.pair(zeta_star)
    real, imag = product.real, product.imag
    beta1 = basis.beta1
    kappa = 0.5 * (imag + real ** 2 / imag) if imag != 0.0 else 0.0
    if abs(kappa) < KAPPA_FLOOR * beta1:
        warn_or_raise(Code.W0406, f"kappa={kappa:.3e} at eta={eta}", strict,
                      details={"c": c, "eta": eta, "kappa": kappa, "beta1": beta1})
        return basis_pair(basis, float(eta))
    g = zeta.scaled(1.0 + 1j * real / imag)
    pair = ProjectionPair(
        c=c, eta=float(eta), value=mode.value, kappa=float(kappa),
        g1=g.real.scaled(1.0 / beta1), g2=g.imag.scaled(1.0 / kappa),
        g1_star=zeta_star.imag.scaled(-beta1 / kappa), g2_star=zeta_star.real)
    internal_logger.debug(f"projection pair at c={c}, eta={eta}: kappa={kappa:.6e}")
    return pair


def free_wave_projection(u1: FieldPair, params: PhysParams, c0: float, shift: float = 0.0) -> np.ndarray:
    """
    k(y) = <U1(., y), zeta2*_{c0}(. - shift)> for every y of the snapshot,
    the resonant content of the free part. Uses the periodic samples only.
    """
    grid = u1.grid
    profile = soliton_profile(params, c0)
    first, second = zeta_functions(profile, grid.x - shift)["zeta2_star"]
    integrand = u1.phi1.values * first[None, :] + u1.phi2.values * second[None, :]
    return np.sum(integrand, axis=1) * grid.dx
