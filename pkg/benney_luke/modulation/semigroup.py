"""The linear modulation semigroup and its kernels.

For the reduced linear symbol

    A*(eta) = [[-(lambda2 + nu) eta^2, 1], [-lambda1^2 eta^2, -(lambda2 - nu) eta^2]]

the matrix A* + lambda2 eta^2 I squares to -(lambda1 eta omega)^2 I with
omega(eta) = sqrt(1 - (nu / lambda1)^2 eta^2), hence

    exp(t A*) = exp(-lambda2 t eta^2) {cos(theta) I + sin(theta) / (lambda1 eta omega) (A* + lambda2 eta^2 I)}

with theta = t lambda1 eta omega. The kernels K1, K2, K3 are the inverse
Fourier transforms (1/2pi) int s(eta) exp(i y eta) d eta of

    s1 = chi1 exp(-lambda2 t eta^2) cos(theta)
    s2 = exp(-lambda2 t eta^2) eta chi1 / omega sin(theta)
    s3 = exp(-lambda2 t eta^2) chi1 / (eta omega) sin(theta)

evaluated on a periodic y-grid wide enough that periodization is invisible.
"""

from typing import Dict, Optional
import numpy as np
import scipy.fft as sfft
from pydantic import BaseModel, ConfigDict
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.linear1d.coefficients import ModulationCoefficients
from benney_luke.modulation.cutoffs import chi1
from benney_luke.modulation.ygrid import ReducedState, YGrid

KERNEL_MARGIN = 40.0
HEAT_WIDTHS = 8.0


def band_edge(coeffs: ModulationCoefficients, eta0: Optional[float] = None) -> float:
    """The band edge in use; E0504 when unset or when omega turns imaginary inside the band."""
    eta0 = coeffs.eta0 if eta0 is None else eta0
    if eta0 is None or eta0 <= 0:
        raise BLError(Code.E0504, message="no band edge eta0 configured", details={"eta0": eta0})
    if abs(coeffs.nu) * eta0 >= coeffs.lambda1:
        raise BLError(Code.E0504, details={"nu": coeffs.nu, "eta0": eta0, "lambda1": coeffs.lambda1})
    return float(eta0)


def a_star(coeffs: ModulationCoefficients, eta) -> np.ndarray:
    eta2 = np.asarray(eta, dtype=float) ** 2
    l1, l2, nu = coeffs.lambda1, coeffs.lambda2, coeffs.nu
    return np.array([[-(l2 + nu) * eta2, np.ones_like(eta2)],
                     [-(l1 ** 2) * eta2, -(l2 - nu) * eta2]])


def omega(coeffs: ModulationCoefficients, eta) -> np.ndarray:
    """sqrt(1 - (nu/lambda1)^2 eta^2), complex beyond |eta| = lambda1 / |nu|."""
    eta = np.asarray(eta, dtype=float)
    return np.sqrt(1.0 - (coeffs.nu / coeffs.lambda1) ** 2 * eta ** 2 + 0j)


def _sin_over(theta: np.ndarray) -> np.ndarray:
    """sin(theta) / theta, analytic through 0 and for complex theta."""
    return np.sinc(theta / np.pi)


def eta_symbol(coeffs: ModulationCoefficients, t: float, eta) -> np.ndarray:
    """exp(t A*(eta)) per mode, shape (2, 2) + shape(eta)."""
    eta = np.asarray(eta, dtype=float)
    l1, l2 = coeffs.lambda1, coeffs.lambda2
    theta = t * l1 * eta * omega(coeffs, eta)
    shifted = a_star(coeffs, eta) + l2 * eta ** 2 * np.eye(2).reshape((2, 2) + (1,) * eta.ndim)
    out = np.cos(theta) * np.eye(2).reshape((2, 2) + (1,) * eta.ndim) + t * _sin_over(theta) * shifted
    return (np.exp(-l2 * t * eta ** 2) * out).real


def expm2(matrix: np.ndarray, h: float) -> np.ndarray:
    """exp(h M) for a stack of real 2 x 2 matrices shaped (2, 2, ...)."""
    tau = 0.5 * (matrix[0, 0] + matrix[1, 1])
    det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
    s = np.sqrt(tau ** 2 - det + 0j)
    eye = np.eye(2).reshape((2, 2) + (1,) * (matrix.ndim - 2))
    # cosh(h s) = cos(i h s) and sinh(h s) / s = h sin(i h s) / (i h s)
    out = np.cos(1j * h * s) * eye + h * _sin_over(1j * h * s) * (matrix - tau * eye)
    return (np.exp(h * tau) * out).real


def apply_symbol(symbol: np.ndarray, grid: YGrid, values: np.ndarray) -> np.ndarray:
    """Mode-wise 2 x 2 symbol applied to a stacked (2, n) real pair."""
    spectrum = grid.fft(values)
    return grid.ifft(np.einsum("ijn,jn->in", symbol, spectrum))


def semigroup_etA(t: float, f: ReducedState, coeffs: ModulationCoefficients) -> ReducedState:
    """exp(t A*(D_y)) f, exact per transverse mode."""
    band_edge(coeffs)
    if t == 0.0:
        return f
    out = apply_symbol(eta_symbol(coeffs, t, f.grid.eta), f.grid, f.stacked())
    return ReducedState.from_stacked(f.grid, out, f.form)


def kernel_grid(t: float, coeffs: ModulationCoefficients, eta0: Optional[float] = None) -> YGrid:
    """
    Periodic grid holding the kernels at time ``t``: four times the light
    cone plus heat and cutoff margins, resolving both chi1 and the heat width.
    """
    eta0 = band_edge(coeffs, eta0)
    reach = coeffs.lambda1 * t + HEAT_WIDTHS * np.sqrt(coeffs.lambda2 * max(t, 1.0)) + KERNEL_MARGIN / eta0
    length = 4.0 * reach
    dy = min(np.pi / eta0, np.sqrt(coeffs.lambda2 * max(t, 1.0)) / 8.0)
    n = sfft.next_fast_len(int(np.ceil(length / dy)))
    return YGrid(length=length, n=n + n % 2)


def _from_symbol(symbol: np.ndarray, grid: YGrid) -> np.ndarray:
    # (1/L) sum_m s(eta_m) exp(i y_j eta_m) with y_j = y_0 + j dy
    return sfft.ifft(symbol * np.exp(1j * grid.eta * grid.y[0]), workers=1).real / grid.dy


class KernelSamples(BaseModel):
    t: float
    grid: YGrid
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    dk3: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def y(self) -> np.ndarray:
        return self.grid.y


def kernel_symbols(coeffs: ModulationCoefficients, t: float, eta, eta0: Optional[float] = None) -> Dict[str, np.ndarray]:
    eta0 = band_edge(coeffs, eta0)
    eta = np.asarray(eta, dtype=float)
    l1, l2 = coeffs.lambda1, coeffs.lambda2
    w = omega(coeffs, eta)
    theta = t * l1 * eta * w
    heat = np.exp(-l2 * t * eta ** 2) * chi1(eta, eta0)
    s3 = (heat * t * l1 * _sin_over(theta)).real
    return {"k1": (heat * np.cos(theta)).real,
            "k2": (heat * eta / w * np.sin(theta)).real,
            "k3": s3,
            "dk3": 1j * eta * s3}


def kernels(t: float, coeffs: ModulationCoefficients, grid: Optional[YGrid] = None,
            eta0: Optional[float] = None) -> KernelSamples:
    """Samples of K1, K2, K3 and d_y K3 at time ``t``."""
    grid = grid or kernel_grid(t, coeffs, eta0)
    symbols = kernel_symbols(coeffs, t, grid.eta, eta0)
    samples = {name: _from_symbol(symbol, grid) for name, symbol in symbols.items()}
    return KernelSamples(t=t, grid=grid, **samples)


def kernel_norms(t: float, coeffs: ModulationCoefficients, eta0: Optional[float] = None) -> Dict[str, float]:
    """||K1||_2, ||K2||_1, ||d_y K3||_2 and sup |K3| at time ``t``."""
    k = kernels(t, coeffs, eta0=eta0)
    dy = k.grid.dy
    norms = {"t": t,
             "k1_l2": float(np.sqrt(np.sum(k.k1 ** 2) * dy)),
             "k2_l1": float(np.sum(np.abs(k.k2)) * dy),
             "dk3_l2": float(np.sqrt(np.sum(k.dk3 ** 2) * dy)),
             "k3_sup": float(np.max(np.abs(k.k3)))}
    internal_logger.debug(f"kernel norms at t={t}: {norms}")
    return norms


def convolve_k3(t: float, f: np.ndarray, grid: YGrid, coeffs: ModulationCoefficients,
                eta0: Optional[float] = None) -> np.ndarray:
    """K3(t) * f on ``grid``."""
    return grid.ifft(kernel_symbols(coeffs, t, grid.eta, eta0)["k3"] * grid.fft(f))


def heat_kernel(t: float, y) -> np.ndarray:
    """H_t(y) = (4 pi t)^(-1/2) exp(-y^2 / 4t)."""
    if t <= 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    y = np.asarray(y, dtype=float)
    return np.exp(-y ** 2 / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)


def box_kernel(t: float, y, lambda1: float) -> np.ndarray:
    """W_t(y) = (2 lambda1)^(-1) on |y| <= lambda1 t, zero outside."""
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) <= lambda1 * t, 0.5 / lambda1, 0.0)


def diffusion_wave_prediction(mass_plus: float, mass_minus: float, coeffs: ModulationCoefficients,
                              t: float, y) -> np.ndarray:
    """
    Linear two-wave asymptotics of (gamma_y, c~): [[1, -1], [lambda1, lambda1]]
    applied to (mass+ H(y + lambda1 t), mass- H(y - lambda1 t)) with H = H_{lambda2 t}.
    """
    l1 = coeffs.lambda1
    plus = mass_plus * heat_kernel(coeffs.lambda2 * t, np.asarray(y) + l1 * t)
    minus = mass_minus * heat_kernel(coeffs.lambda2 * t, np.asarray(y) - l1 * t)
    return np.stack([plus - minus, l1 * (plus + minus)])
