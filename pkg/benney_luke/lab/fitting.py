"""Power-law fits of decaying diagnostics.

A series v(t) ~ C t^p is fitted by least squares on (log t, log v); the
confidence interval of p comes from a seeded residual bootstrap.
"""

from typing import Optional, Sequence, Tuple
import numpy as np
from pydantic import BaseModel
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import run_logger

MIN_SAMPLES = 20
DEFAULT_RESAMPLES = 1000


class DecayFit(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    ci: Tuple[float, float]
    samples: int
    confidence: float = 0.95

    def to_report(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "window": list(self.window), "ci": list(self.ci), "samples": self.samples,
                "confidence": self.confidence}


def select_window(t: np.ndarray, window: Optional[Sequence[float]]) -> np.ndarray:
    """Boolean mask of the samples with t inside ``window`` (inclusive)."""
    if window is None:
        return np.ones(t.shape, dtype=bool)
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi or t.size == 0 or lo < t.min() or hi > t.max():
        raise BLError(Code.E0703, details={"window": [lo, hi],
                                           "data": [float(t.min()), float(t.max())] if t.size else []})
    return (t >= lo) & (t <= hi)


def fit_decay_exponent(t: Sequence[float], values: Sequence[float], window: Optional[Sequence[float]] = None,
                       resamples: int = DEFAULT_RESAMPLES, seed: int = 0, confidence: float = 0.95) -> DecayFit:
    """
    Slope of log(values) against log(t) over ``window``.

    Needs at least 20 samples in the window (E0701), all with t > 0 and
    values > 0 (E0702). The interval is the percentile interval of the
    slope over ``resamples`` fits to fitted line + resampled residuals.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape or t.ndim != 1:
        raise BLError(Code.E0703, message="times and values must be 1D of equal length",
                      details={"t": list(t.shape), "values": list(values.shape)})
    mask = select_window(t, window)
    tw, vw = t[mask], values[mask]
    if tw.size < MIN_SAMPLES:
        raise BLError(Code.E0701, details={"samples": int(tw.size), "required": MIN_SAMPLES})
    if np.any(tw <= 0) or np.any(~(vw > 0)):
        raise BLError(Code.E0702, details={"first_bad": float(tw[np.argmax((tw <= 0) | ~(vw > 0))])})

    x, y = np.log(tw), np.log(vw)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    residuals = y - fitted
    total = np.sum((y - y.mean()) ** 2)
    r_squared = float(1.0 - np.sum(residuals ** 2) / total) if total > 0 else 1.0

    if resamples > 0:
        rng = np.random.default_rng(seed)
        picks = rng.integers(0, residuals.size, size=(resamples, residuals.size))
        boot = fitted[None, :] + residuals[picks]
        slopes = np.polyfit(x, boot.T, 1)[0]
        tail = 50.0 * (1.0 - confidence)
        ci = (float(np.percentile(slopes, tail)), float(np.percentile(slopes, 100.0 - tail)))
    else:
        ci = (float(slope), float(slope))

    fit = DecayFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared,
                   window=(float(tw[0]), float(tw[-1])), ci=ci, samples=int(tw.size), confidence=confidence)
    run_logger.info(f"Decay fit over [{fit.window[0]:g}, {fit.window[1]:g}]: slope {fit.slope:.4f} "
                    f"({100 * confidence:.0f}% CI [{ci[0]:.4f}, {ci[1]:.4f}]), R^2 {r_squared:.4f}")
    return fit
