"""Smooth Fourier cutoffs in the transverse wavenumber eta.

    chi   = 1 on |eta| <= eta0 / 4,   0 for |eta| >= eta0 / 2
    chi1  = 1 on |eta| <= eta0 / 2,   0 for |eta| >= 3 eta0 / 4
    chi2  = 1 - chi1

All transitions are built from exp(-1/x) and are C-infinity.
"""

import numpy as np
from benney_luke.common.error import BLError, Code


def _flat(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    positive = x > 0
    out[positive] = np.exp(-1.0 / x[positive])
    return out


def smooth_step(s) -> np.ndarray:
    """0 for s <= 0, 1 for s >= 1, smooth and monotone in between."""
    s = np.asarray(s, dtype=float)
    left, right = _flat(s), _flat(1.0 - s)
    return left / (left + right)


def cutoff(eta, inner: float, outer: float) -> np.ndarray:
    """1 on |eta| <= inner, 0 on |eta| >= outer."""
    if not 0.0 <= inner < outer:
        raise BLError(Code.E0504, message="cutoff needs 0 <= inner < outer",
                      details={"inner": inner, "outer": outer})
    eta = np.abs(np.asarray(eta, dtype=float))
    return smooth_step((outer - eta) / (outer - inner))


def chi(eta, eta0: float) -> np.ndarray:
    return cutoff(eta, 0.25 * eta0, 0.5 * eta0)


def chi1(eta, eta0: float) -> np.ndarray:
    return cutoff(eta, 0.5 * eta0, 0.75 * eta0)


def chi2(eta, eta0: float) -> np.ndarray:
    return 1.0 - chi1(eta, eta0)


def band_indicator(eta, eta0: float) -> np.ndarray:
    """Sharp indicator of [-eta0, eta0], the support of band-limited modulations."""
    return (np.abs(np.asarray(eta, dtype=float)) <= eta0).astype(float)
