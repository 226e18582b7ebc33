"""Numerical check of the spectral gap of L_c(eta) away from the resonant pair.

For every sampled eta the dense weighted operator is diagonalized. Inside
the band |eta| <= eta0 the resonant eigenvalue and its conjugate are
removed (the two eigenvalues nearest 0 at eta = 0); outside the band the
whole spectrum is retained. The report holds the largest real part of the
retained spectrum per eta and overall.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence
import numpy as np
from pydantic import BaseModel
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PhysParams
from benney_luke.soliton.profile import soliton_profile
from benney_luke.linear1d.coefficients import coefficient_core, resonant_rates
from benney_luke.linear1d.eigencurve import dense_eigensystem
from benney_luke.linear1d.grid1d import Grid1D, grid1d_for
from benney_luke.linear1d.operator import LinearizedBL
from benney_luke.linear1d.zeta import zeta_basis


class GapSample(BaseModel):
    eta: float
    deflated: bool
    max_re: float
    max_re_full: float
    removed: List[List[float]]


class SpectralGapReport(BaseModel):
    c: float
    alpha: float
    eta0: float
    n: int
    samples: List[GapSample]
    max_re_outside_band: float
    max_re_with_resonant: float
    passed: bool

    @property
    def gap(self) -> float:
        """The decay rate beta of the retained spectrum, -max Re."""
        return -self.max_re_outside_band

    def to_report(self) -> dict:
        return {"c": self.c, "alpha": self.alpha, "eta0": self.eta0, "n": self.n,
                "max_re_outside_band": self.max_re_outside_band,
                "max_re_with_resonant": self.max_re_with_resonant, "passed": self.passed}


def deflate(values: np.ndarray, eta: float, lambda1: float, lambda2: float) -> tuple:
    """Drop the resonant eigenvalue and its conjugate; returns (kept, removed)."""
    if eta == 0.0:
        removed = np.argsort(np.abs(values))[:2]
    else:
        prediction = 1j * lambda1 * abs(eta) - lambda2 * eta ** 2
        first = int(np.argmin(np.abs(values - prediction)))
        distance = np.abs(values - np.conj(prediction))
        distance[first] = np.inf
        removed = np.array([first, int(np.argmin(distance))])
    keep = np.ones(values.size, dtype=bool)
    keep[removed] = False
    return values[keep], values[removed]


def spectral_gap_check(params: PhysParams, c: float, alpha: Optional[float], eta0: float,
                       etas: Optional[Sequence[float]] = None, grid: Optional[Grid1D] = None,
                       threads: int = 1) -> SpectralGapReport:
    """
    Largest real part of the deflated spectrum over ``etas`` (default nine
    points in [0, 2 eta0]; the spectrum at -eta equals the one at eta).
    ``passed`` means the retained spectrum lies in the open left half plane.
    """
    profile = soliton_profile(params, c)
    grid = grid or grid1d_for(profile, alpha)
    lambda1, lambda2 = resonant_rates(coefficient_core(params, c, grid, zeta_basis(params, c, grid)))
    op = LinearizedBL(params, profile, grid)
    etas = np.linspace(0.0, 2.0 * eta0, 9) if etas is None else np.asarray(etas, dtype=float)

    def sample(eta: float) -> GapSample:
        values, _, _ = dense_eigensystem(op.matrix(eta), vectors=False)
        full = float(np.max(values.real))
        if abs(eta) > eta0:
            return GapSample(eta=eta, deflated=False, max_re=full, max_re_full=full, removed=[])
        kept, removed = deflate(values, eta, lambda1, lambda2)
        return GapSample(eta=eta, deflated=True, max_re=float(np.max(kept.real)), max_re_full=full,
                         removed=[[float(v.real), float(v.imag)] for v in removed])

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        samples = list(pool.map(sample, [float(e) for e in etas]))
    if not samples:
        raise BLError(Code.E0405, message="no transverse modes to check")

    outside = max(s.max_re for s in samples)
    report = SpectralGapReport(c=c, alpha=grid.alpha, eta0=eta0, n=grid.n, samples=samples,
                               max_re_outside_band=outside,
                               max_re_with_resonant=max(s.max_re_full for s in samples),
                               passed=outside < 0.0)
    internal_logger.info(f"spectral gap at c={c}, alpha={grid.alpha:.6f}: max Re {outside:.6e} "
                         f"({'pass' if report.passed else 'fail'})")
    return report
