"""The resonant eigenvalue curve lambda_c(eta) = i lambda1 eta - lambda2 eta^2 + O(eta^3).

Each eta is an independent dense eigenproblem of the weighted operator;
the branch is picked as the eigenvalue nearest the two-term prediction.
Eigenvectors are normalized so that

    zeta(eta)  = zeta1 + a2 zeta2 + z,       z  orthogonal to zeta1*, zeta2*
    zeta*(eta) = zeta2* + b1 zeta1* + z*,    z* orthogonal to zeta1, zeta2
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, NamedTuple, Optional, Sequence
import numpy as np
import pandas as pd
import scipy.linalg as sla
from pydantic import BaseModel, ConfigDict
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PhysParams
from benney_luke.soliton.profile import soliton_profile
from benney_luke.linear1d.coefficients import ModulationCoefficients, coefficient_core, resonant_rates
from benney_luke.linear1d.grid1d import Grid1D, VectorPair1D, grid1d_for
from benney_luke.linear1d.operator import LinearizedBL
from benney_luke.linear1d.zeta import ZetaBasis, zeta_basis

TRACKING_RATIO = 0.5
ETA0_CAP = 0.3
SPECTRUM_DUMP = 8


class ResonantMode(NamedTuple):
    eta: float
    value: complex
    tracked: bool
    zeta: Optional[VectorPair1D]
    zeta_star: Optional[VectorPair1D]


def nearest_eigenvalues(values: np.ndarray, target: complex, count: int = SPECTRUM_DUMP) -> list:
    order = np.argsort(np.abs(values - target))[:count]
    return [[float(values[i].real), float(values[i].imag)] for i in order]


def dense_eigensystem(matrix: np.ndarray, vectors: bool) -> tuple:
    """Eigenvalues (and right/left eigenvectors) of a dense matrix, E0405 on failure."""
    try:
        if vectors:
            values, left, right = sla.eig(matrix, left=True, right=True)
        else:
            values, left, right = sla.eigvals(matrix), None, None
    except (sla.LinAlgError, ValueError) as e:
        raise BLError(Code.E0405, details={"size": matrix.shape[0]}, cause=e) from e
    if not np.all(np.isfinite(values)):
        raise BLError(Code.E0405, message="non-finite eigenvalues", details={"size": matrix.shape[0]})
    return values, left, right


def normalize_pair(basis: ZetaBasis, zeta: VectorPair1D, zeta_star: VectorPair1D) -> tuple:
    """Scale ``zeta`` to unit zeta1-coefficient and ``zeta_star`` to unit zeta2*-coefficient."""
    p = basis.pairings
    a2 = zeta.pair(basis.zeta2_star) / p["z2_z2s"]
    a1 = (zeta.pair(basis.zeta1_star) - a2 * p["z2_z1s"]) / p["z1_z1s"]
    b1_conj = basis.zeta1.pair(zeta_star) / p["z1_z1s"]
    b2_conj = (basis.zeta2.pair(zeta_star) - b1_conj * p["z2_z1s"]) / p["z2_z2s"]
    if a1 == 0 or b2_conj == 0:
        raise BLError(Code.E0404, message="eigenvector has no component along the resonant pair")
    return zeta.scaled(1.0 / a1), zeta_star.scaled(1.0 / np.conj(b2_conj))


def resonant_mode(op: LinearizedBL, basis: ZetaBasis, eta: float, lambda1: float, lambda2: float,
                  vectors: bool = True, strict: bool = True) -> ResonantMode:
    """
    The eigenvalue of L_c(eta) nearest i lambda1 eta - lambda2 eta^2. The
    pick is ambiguous when it is not at least twice as close as the
    runner-up; that raises E0404 with the nearby spectrum, or returns an
    untracked mode when ``strict`` is off. eta = 0 returns the Jordan pair
    (zeta1, zeta2*) at 0.
    """
    if eta == 0.0:
        return ResonantMode(0.0, 0j, True, basis.zeta1, basis.zeta2_star)
    prediction = 1j * lambda1 * eta - lambda2 * eta ** 2
    values, left, right = dense_eigensystem(op.matrix(eta), vectors)
    distance = np.abs(values - prediction)
    first, second = np.argsort(distance)[:2]
    tracked = bool(distance[first] < TRACKING_RATIO * distance[second])
    if not tracked:
        details = {"eta": eta, "prediction": [prediction.real, prediction.imag],
                   "nearest": nearest_eigenvalues(values, prediction)}
        if strict:
            raise BLError(Code.E0404, details=details)
        internal_logger.warning(f"resonant branch ambiguous at eta={eta}: {details['nearest'][:2]}")
    value = complex(values[first])
    if not vectors:
        return ResonantMode(float(eta), value, tracked, None, None)
    n = op.grid.n
    zeta = VectorPair1D(grid=op.grid, values=right[:, first].reshape(2, n), rate=1)
    zeta_star = VectorPair1D(grid=op.grid, values=left[:, first].reshape(2, n), rate=-1)
    zeta, zeta_star = normalize_pair(basis, zeta, zeta_star)
    return ResonantMode(float(eta), value, tracked, zeta, zeta_star)


class EigenCurve(BaseModel):
    """Samples of lambda_c(eta) with the odd/even polynomial fits of Im and Re."""
    c: float
    alpha: float
    eta: np.ndarray
    values: np.ndarray
    tracked: np.ndarray
    lambda1_fit: float
    lambda2_fit: float
    cubic_fit: float
    quartic_fit: float
    modes: Optional[List[ResonantMode]] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def index(self, eta: float) -> int:
        hits = np.flatnonzero(np.isclose(self.eta, eta, rtol=0.0, atol=1e-14))
        if hits.size == 0:
            raise KeyError(f"eta={eta} was not sampled")
        return int(hits[0])

    def value(self, eta: float) -> complex:
        return complex(self.values[self.index(eta)])

    def conjugate_defect(self) -> float:
        """max |lambda(-eta) - conj(lambda(eta))| over the sampled +- pairs."""
        defects = [abs(self.value(-e) - np.conj(self.value(e)))
                   for e in self.eta if e > 0 and np.any(np.isclose(self.eta, -e, rtol=0.0, atol=1e-14))]
        return float(max(defects)) if defects else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"eta": self.eta, "re": self.values.real, "im": self.values.imag,
                             "tracked": self.tracked})


def _fit(eta: np.ndarray, values: np.ndarray) -> tuple:
    """Im = l1 eta + p eta^3 and Re = -l2 eta^2 + q eta^4 by least squares."""
    odd = np.column_stack([eta, eta ** 3])
    even = np.column_stack([-eta ** 2, eta ** 4])
    (l1, p), *_ = np.linalg.lstsq(odd, values.imag, rcond=None)
    (l2, q), *_ = np.linalg.lstsq(even, values.real, rcond=None)
    return float(l1), float(l2), float(p), float(q)


def eigencurve(params: PhysParams, c: float, alpha: Optional[float] = None, etas: Optional[Sequence[float]] = None,
               grid: Optional[Grid1D] = None, coeffs: Optional[ModulationCoefficients] = None,
               threads: int = 1, strict: bool = True, vectors: bool = False) -> EigenCurve:
    """
    Track the resonant eigenvalue over ``etas`` (default 17 points in
    [-0.1, 0.1]). Eigensolves run on ``threads`` workers and are assembled
    in input order.
    """
    profile = soliton_profile(params, c)
    grid = grid or grid1d_for(profile, alpha)
    basis = zeta_basis(params, c, grid)
    if coeffs is not None:
        lambda1, lambda2 = coeffs.lambda1, coeffs.lambda2
    else:
        lambda1, lambda2 = resonant_rates(coefficient_core(params, c, grid, basis))
    op = LinearizedBL(params, profile, grid)
    etas = np.linspace(-0.1, 0.1, 17) if etas is None else np.asarray(etas, dtype=float)

    def solve(eta: float) -> ResonantMode:
        return resonant_mode(op, basis, float(eta), lambda1, lambda2, vectors=vectors, strict=strict)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        modes = list(pool.map(solve, etas))

    values = np.array([m.value for m in modes])
    tracked = np.array([m.tracked for m in modes])
    usable = tracked & (etas != 0.0)
    if np.count_nonzero(usable) < 2:
        raise BLError(Code.E0404, message="fewer than two tracked samples to fit", details={"eta": etas.tolist()})
    l1, l2, p, q = _fit(etas[usable], values[usable])
    internal_logger.debug(f"eigencurve c={c}: lambda1 fit {l1:.10f} (formula {lambda1:.10f}), "
                          f"lambda2 fit {l2:.10f} (formula {lambda2:.10f})")
    return EigenCurve(c=c, alpha=grid.alpha, eta=etas, values=values, tracked=tracked,
                      lambda1_fit=l1, lambda2_fit=l2, cubic_fit=p, quartic_fit=q,
                      modes=modes if vectors else None)


def default_eta0(coeffs: ModulationCoefficients, curve: EigenCurve, cap: float = ETA0_CAP,
                 ratio: float = 0.5) -> float:
    """
    Largest sampled eta > 0 with |nu| eta <= ratio lambda1, at most ``cap``
    and inside the range where every positive sample tracked the branch.
    """
    positive = np.sort(curve.eta[curve.eta > 0])
    limit = 0.0
    for eta in positive:
        if not curve.tracked[curve.index(eta)]:
            break
        limit = eta
    admissible = [e for e in positive if e <= limit and e <= cap and abs(coeffs.nu) * e <= ratio * coeffs.lambda1]
    if not admissible:
        raise BLError(Code.E0504, message="no sampled eta satisfies the band edge rules",
                      details={"nu": coeffs.nu, "lambda1": coeffs.lambda1, "tracking_limit": float(limit)})
    return float(max(admissible))
