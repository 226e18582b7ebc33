"""Periodic transverse grid and the (gamma, c) pair living on it."""

from functools import cached_property
from typing import Literal
import numpy as np
import scipy.fft as sfft
from pydantic import BaseModel, ConfigDict, model_validator
from benney_luke.common.error import BLError, Code
from benney_luke.spectral.grid import fft_workers

DEALIAS_FRACTION = 2.0 / 3.0


class YGrid(BaseModel):
    """Periodic grid of ``n`` points on [-length/2, length/2)."""
    length: float
    n: int

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check(self) -> "YGrid":
        if self.n < 8 or self.n % 2:
            raise BLError(Code.E0101, message=f"y sample count must be even and >= 8, got {self.n}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise BLError(Code.E0101, message=f"y length must be positive, got {self.length}")
        return self

    @property
    def dy(self) -> float:
        return self.length / self.n

    @property
    def nyquist(self) -> float:
        return np.pi / self.dy

    @cached_property
    def y(self) -> np.ndarray:
        return -0.5 * self.length + self.dy * np.arange(self.n)

    @cached_property
    def eta(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.dy)

    @cached_property
    def ik(self) -> np.ndarray:
        sym = 1j * self.eta
        sym[self.n // 2] = 0.0
        return sym

    def fft(self, values: np.ndarray) -> np.ndarray:
        return sfft.fft(values, axis=-1, workers=fft_workers())

    def ifft(self, spectrum: np.ndarray) -> np.ndarray:
        return sfft.ifft(spectrum, axis=-1, workers=fft_workers()).real

    def derivative(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return self.ifft(self.ik ** order * self.fft(values))

    def band_mask(self, eta0: float) -> np.ndarray:
        mask = np.abs(self.eta) <= eta0
        mask[self.n // 2] = False
        return mask

    def project(self, values: np.ndarray, eta0: float) -> np.ndarray:
        """Band projection onto |eta| <= eta0."""
        return self.ifft(self.band_mask(eta0) * self.fft(values))

    def check_band(self, eta0: float) -> None:
        """Products of band-limited fields stay alias free below 2/3 of the Nyquist wavenumber."""
        if eta0 > DEALIAS_FRACTION * self.nyquist:
            raise BLError(Code.E0504, message="band exceeds the dealiased range of the y-grid",
                          details={"eta0": eta0, "nyquist": self.nyquist})

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values, axis=-1) * self.dy)

    def norm(self, values: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.asarray(values) ** 2) * self.dy))


def y_grid(length: float, n: int) -> YGrid:
    return YGrid(length=length, n=n)


class ReducedState(BaseModel):
    """
    Real band-limited pair on a YGrid: (gamma, c~) in the "gamma_c" form,
    (gamma, b) in the "gamma_b" form.
    """
    grid: YGrid
    gamma: np.ndarray
    speed: np.ndarray
    form: Literal["gamma_c", "gamma_b"] = "gamma_c"

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _check(self) -> "ReducedState":
        for name in ("gamma", "speed"):
            values = getattr(self, name)
            if values.shape != (self.grid.n,):
                raise BLError(Code.E0103, message=f"{name} has shape {values.shape}, grid has {self.grid.n} points")
            if np.iscomplexobj(values):
                raise BLError(Code.E0103, message=f"{name} must be real")
        return self

    @classmethod
    def zeros(cls, grid: YGrid, form: str = "gamma_c") -> "ReducedState":
        return cls(grid=grid, gamma=np.zeros(grid.n), speed=np.zeros(grid.n), form=form)

    @classmethod
    def from_stacked(cls, grid: YGrid, stacked: np.ndarray, form: str = "gamma_c") -> "ReducedState":
        return cls(grid=grid, gamma=np.array(stacked[0], dtype=float), speed=np.array(stacked[1], dtype=float),
                   form=form)

    def stacked(self) -> np.ndarray:
        return np.stack([self.gamma, self.speed])

    def projected(self, eta0: float) -> "ReducedState":
        return ReducedState(grid=self.grid, gamma=self.grid.project(self.gamma, eta0),
                            speed=self.grid.project(self.speed, eta0), form=self.form)

    def sup(self) -> float:
        return float(max(np.max(np.abs(self.gamma)), np.max(np.abs(self.speed))))
