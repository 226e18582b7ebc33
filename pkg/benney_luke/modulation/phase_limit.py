"""Phase-limit predictor for the transverse shift gamma.

For a forcing f(s, y) recorded on s in [s_0, t],

    gamma(t) = int_{s_0}^{t} H_{lambda2 (t - s)} * W_{t - s} * f(s) ds

with W_tau = (2 lambda1)^-1 1_{[-lambda1 tau, lambda1 tau]} the box
kernel. In Fourier the kernel pair is exp(-lambda2 tau eta^2) sin(lambda1 tau eta) / (lambda1 eta),
so the time integral is taken on spectra and inverted once. Inside the
cone the prediction settles to gamma_* = (2 lambda1)^-1 int int f.
"""

from typing import Optional
import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.integrate import trapezoid
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.linear1d.coefficients import ModulationCoefficients
from benney_luke.modulation.reduced import ModulationTrack, quadratic_terms
from benney_luke.modulation.semigroup import band_edge
from benney_luke.modulation.ygrid import YGrid

CONE_MARGIN = 0.1


class PhaseLimitPrediction(BaseModel):
    t: float
    grid: YGrid
    gamma: np.ndarray
    gamma_star: float
    inside_sup: float
    inside_min: float
    outside_sup: float
    delta: float

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def to_report(self) -> dict:
        return {"t": self.t, "gamma_star": self.gamma_star, "inside_sup": self.inside_sup,
                "inside_min": self.inside_min, "outside_sup": self.outside_sup, "delta": self.delta}


def box_heat_symbol(coeffs: ModulationCoefficients, tau, eta) -> np.ndarray:
    """Fourier symbol of H_{lambda2 tau} * W_tau, equal to tau at eta = 0."""
    tau = np.asarray(tau, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return np.exp(-coeffs.lambda2 * tau * eta ** 2) * tau * np.sinc(coeffs.lambda1 * tau * eta / np.pi)


def _cone_stat(values: np.ndarray, mask: np.ndarray, reducer) -> float:
    return float(reducer(values[mask])) if np.any(mask) else 0.0


def phase_limit_predictor(times: np.ndarray, forcing: np.ndarray, grid: YGrid, coeffs: ModulationCoefficients,
                          t: Optional[float] = None, delta: float = CONE_MARGIN) -> PhaseLimitPrediction:
    """
    Evaluate the predicted gamma(t, y) from forcing samples ``forcing[i]``
    taken at ``times[i]``. Samples later than ``t`` (default: the last
    time) are ignored; the cone sups use |y| <= (lambda1 - delta) t and
    |y| >= (lambda1 + delta) t.
    """
    times = np.asarray(times, dtype=float)
    forcing = np.asarray(forcing, dtype=float)
    if forcing.shape != (times.size, grid.n):
        raise BLError(Code.E0103, message=f"forcing has shape {forcing.shape}, expected {(times.size, grid.n)}")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise BLError(Code.E0503, message="forcing times must increase")
    t = float(times[-1]) if t is None else float(t)
    used = times <= t
    lambda1 = coeffs.lambda1

    if np.count_nonzero(used) < 2:
        gamma = np.zeros(grid.n)
        gamma_star = 0.0
    else:
        s, f = times[used], forcing[used]
        spectra = grid.fft(f)
        weighted = box_heat_symbol(coeffs, (t - s)[:, None], grid.eta[None, :]) * spectra
        gamma = grid.ifft(trapezoid(weighted, s, axis=0))
        gamma_star = float(trapezoid(np.sum(f, axis=1) * grid.dy, s) / (2.0 * lambda1))

    y = np.abs(grid.y)
    inside = y <= (lambda1 - delta) * t
    outside = y >= (lambda1 + delta) * t
    prediction = PhaseLimitPrediction(
        t=t, grid=grid, gamma=gamma, gamma_star=gamma_star,
        inside_sup=_cone_stat(np.abs(gamma), inside, np.max),
        inside_min=_cone_stat(np.abs(gamma), inside, np.min),
        outside_sup=_cone_stat(np.abs(gamma), outside, np.max), delta=delta)
    internal_logger.debug(f"phase limit at t={t}: {prediction.to_report()}")
    return prediction


def track_forcing(track: ModulationTrack, coeffs: ModulationCoefficients, eta0: Optional[float] = None) -> np.ndarray:
    """
    Forcing of the phase equation along a recorded track: eliminating c~
    from the quadratic system gives gamma_tt - lambda1^2 gamma_yy = N2 + d_t N1
    up to dissipative terms, with N1, N2 the projected quadratic parts.
    d_t is taken by finite differences over the recorded times.
    """
    eta0 = band_edge(coeffs, eta0)
    grid = track.grid
    terms = np.stack([quadratic_terms(np.stack([g, c]), grid, coeffs, "gamma_c", eta0)
                      for g, c in zip(track.gamma, track.c_tilde)])
    if len(track.t) < 2:
        return terms[:, 1]
    return terms[:, 1] + np.gradient(terms[:, 0], track.times, axis=0)
