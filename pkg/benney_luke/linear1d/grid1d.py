"""Fourier collocation on [-L, L) for the weighted 1D problems.

Functions of the exponentially weighted spaces are stored conjugated: a
member u of L^2_alpha is represented by the periodic samples of
exp(alpha z) u, a member of L^2_{-alpha} by those of exp(-alpha z) u. On
conjugated samples d/dz becomes the multiplier of symbol ik - alpha
(respectively ik + alpha), so every operator keeps its constant
coefficient symbols and only the derivative symbol is shifted.
"""

from functools import cached_property
from typing import Optional
import numpy as np
import scipy.fft as sfft
from pydantic import BaseModel, model_validator
from benney_luke.common.error import BLError, Code
from benney_luke.soliton.profile import SolitonProfile

TAIL_TOLERANCE = 1e-10


class Grid1D(BaseModel):
    """
    Periodic grid of ``n`` points on [-length, length) carrying the weight
    rate ``alpha``.
    """
    length: float
    n: int
    alpha: float

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check(self) -> "Grid1D":
        if self.n < 8 or self.n % 2:
            raise BLError(Code.E0101, message=f"1D sample count must be even and >= 8, got {self.n}")
        if not self.length > 0:
            raise BLError(Code.E0407, details={"length": self.length})
        if not self.alpha > 0:
            raise BLError(Code.E0401, details={"alpha": self.alpha})
        return self

    def key(self) -> tuple:
        return (self.length, self.n, self.alpha)

    @property
    def dz(self) -> float:
        return 2.0 * self.length / self.n

    @cached_property
    def z(self) -> np.ndarray:
        return -self.length + self.dz * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.dz)

    @cached_property
    def ik(self) -> np.ndarray:
        """Symbol of d/dz with the Nyquist mode zeroed."""
        sym = 1j * self.k
        sym[self.n // 2] = 0.0
        return sym

    def derivative_symbol(self, rate: float = 1.0) -> np.ndarray:
        """Symbol of d/dz on samples conjugated by exp(rate * alpha * z)."""
        return self.ik - rate * self.alpha

    def weight(self, rate: float = 1.0) -> np.ndarray:
        return np.exp(rate * self.alpha * self.z)

    def apply(self, symbol: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Multiplier ``symbol`` applied along the last axis."""
        out = sfft.ifft(symbol * sfft.fft(values, axis=-1), axis=-1)
        return out if np.iscomplexobj(values) else out.real

    def matrix(self, symbol: np.ndarray) -> np.ndarray:
        """
        Dense n x n matrix of a multiplier. Symbols with s(-k) = conj(s(k))
        give real matrices, which is the case for every symbol built from
        ``derivative_symbol``.
        """
        eye = np.eye(self.n)
        columns = sfft.ifft(symbol[:, None] * sfft.fft(eye, axis=0), axis=0)
        return columns.real

    def integrate(self, values: np.ndarray) -> complex:
        return np.sum(values, axis=-1) * self.dz

    def interpolate(self, values: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Trigonometric interpolant of periodic ``values`` at arbitrary ``points``."""
        coefficients = sfft.fft(values, axis=-1) / self.n
        coefficients[..., self.n // 2] = 0.0
        phases = np.exp(1j * np.outer(np.asarray(points) + self.length, self.k))
        out = coefficients @ phases.T
        return out if np.iscomplexobj(values) else out.real

    def check_tails(self, profile: SolitonProfile) -> float:
        """
        Largest tail of the conjugated resonant functions at the box edge,
        exp(-min(alpha, alpha_c - alpha) L). Raises E0401 for alpha >= alpha_c
        and E0407 when the tail exceeds TAIL_TOLERANCE.
        """
        if self.alpha >= profile.alpha:
            raise BLError(Code.E0401, details={"alpha": self.alpha, "alpha_c": profile.alpha})
        tail = float(np.exp(-min(self.alpha, profile.alpha - self.alpha) * self.length))
        if tail > TAIL_TOLERANCE:
            raise BLError(Code.E0407, details={"length": self.length, "alpha": self.alpha,
                                               "alpha_c": profile.alpha, "tail": tail})
        return tail


def grid1d_for(profile: SolitonProfile, alpha: Optional[float] = None, n: int = 384,
               decay: float = 32.0) -> Grid1D:
    """
    Grid sized for ``profile``: alpha defaults to alpha_c / 2 and the half
    length is ``decay`` / min(alpha, alpha_c - alpha), so the conjugated
    tails are exp(-decay) at the edges.
    """
    alpha = 0.5 * profile.alpha if alpha is None else alpha
    if not 0.0 < alpha < profile.alpha:
        raise BLError(Code.E0401, details={"alpha": alpha, "alpha_c": profile.alpha})
    grid = Grid1D(length=decay / min(alpha, profile.alpha - alpha), n=n, alpha=alpha)
    grid.check_tails(profile)
    return grid


class VectorPair1D(BaseModel):
    """
    A 2-vector function on a Grid1D, stored conjugated by exp(rate alpha z):
    rate +1 for members of L^2_alpha (eigenfunctions), -1 for members of
    L^2_{-alpha} (adjoint functions), 0 for plain samples.
    """
    grid: Grid1D
    values: np.ndarray
    rate: int = 1

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @model_validator(mode="after")
    def _check(self) -> "VectorPair1D":
        if self.values.shape != (2, self.grid.n):
            raise BLError(Code.E0103, message=f"pair of shape {self.values.shape} does not fit n={self.grid.n}")
        if not np.all(np.isfinite(self.values)):
            raise BLError(Code.E0405, message="non-finite samples in a 1D vector function")
        return self

    @classmethod
    def from_physical(cls, grid: Grid1D, first: np.ndarray, second: np.ndarray, rate: int = 1) -> "VectorPair1D":
        return cls(grid=grid, values=np.stack([first, second]) * grid.weight(rate), rate=rate)

    def with_values(self, values: np.ndarray) -> "VectorPair1D":
        return VectorPair1D(grid=self.grid, values=values, rate=self.rate)

    def physical(self) -> np.ndarray:
        """
        Unconjugated samples. Roundoff is amplified by up to exp(alpha L) at
        the edge where the weight is small.
        """
        return self.values * self.grid.weight(-self.rate)

    def pair(self, other: "VectorPair1D") -> complex:
        """<self, other> = sum over components of the integral of self * conj(other)."""
        product = np.sum(self.values * np.conj(other.values), axis=0)
        if self.rate + other.rate:
            product = product * self.grid.weight(-(self.rate + other.rate))
        return complex(self.grid.integrate(product))

    def norm(self, rate: Optional[int] = None) -> float:
        """L^2 norm in the space weighted by exp(2 rate alpha z); default its own space."""
        rate = self.rate if rate is None else rate
        samples = self.values if rate == self.rate else self.values * self.grid.weight(rate - self.rate)
        return float(np.sqrt(self.grid.integrate(np.sum(np.abs(samples) ** 2, axis=0)).real))

    @property
    def real(self) -> "VectorPair1D":
        return self.with_values(self.values.real)

    @property
    def imag(self) -> "VectorPair1D":
        return self.with_values(self.values.imag)

    def conj(self) -> "VectorPair1D":
        return self.with_values(np.conj(self.values))

    def __add__(self, other: "VectorPair1D") -> "VectorPair1D":
        if other.rate != self.rate:
            raise BLError(Code.E0103, message="cannot add functions stored with different weights")
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "VectorPair1D") -> "VectorPair1D":
        return self + other.scaled(-1.0)

    def scaled(self, factor: complex) -> "VectorPair1D":
        return self.with_values(self.values * factor)
