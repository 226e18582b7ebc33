from typing import Any, Optional, Protocol, runtime_checkable
import numpy as np
import scipy.fft as sfft
from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator
from benney_luke.common.error import BLError, Code
from benney_luke.spectral.grid import Grid2D, fft_workers


def transform(values: np.ndarray) -> np.ndarray:
    """Real-to-complex 2D transform of samples shaped (ny, nx)."""
    return sfft.rfft2(values, workers=fft_workers())


def inverse_transform(spectrum: np.ndarray, grid: Grid2D) -> np.ndarray:
    return sfft.irfft2(spectrum, s=grid.shape, workers=fft_workers())


def _frozen_copy(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


class Field2D(BaseModel):
    """
    Real samples on a Grid2D with a lazily cached half spectrum.

    Values are copied on construction and are read-only afterwards, so the
    cached spectrum can never go stale.
    """
    grid: Grid2D
    values: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    _spectrum: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data):
        if isinstance(data, dict) and "values" in data:
            data = dict(data)
            data["values"] = _frozen_copy(data["values"])
        return data

    @model_validator(mode="after")
    def _check_shape(self) -> "Field2D":
        if self.values.shape != self.grid.shape:
            raise BLError(Code.E0103, message=f"Values of shape {self.values.shape} do not fit grid {self.grid.shape}")
        return self

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field2D":
        return cls(grid=grid, values=np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid2D, func) -> "Field2D":
        xx, yy = grid.mesh()
        return cls(grid=grid, values=np.broadcast_to(func(xx, yy), grid.shape))

    @classmethod
    def from_spectrum(cls, grid: Grid2D, spectrum: np.ndarray) -> "Field2D":
        field = cls(grid=grid, values=inverse_transform(spectrum, grid))
        return field

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            spec = transform(self.values)
            spec.setflags(write=False)
            self._spectrum = spec
        return self._spectrum

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2) * self.grid.cell_area))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def with_values(self, values: np.ndarray) -> "Field2D":
        return Field2D(grid=self.grid, values=values)

    def _check_grid(self, other: "Field2D") -> None:
        if not self.grid.same_as(other.grid):
            raise BLError(Code.E0103, details={"left": self.grid.key(), "right": other.grid.key()})

    def __add__(self, other):
        if isinstance(other, Field2D):
            self._check_grid(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field2D):
            self._check_grid(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field2D):
            self._check_grid(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


@runtime_checkable
class Background(Protocol):
    """Analytic, x-only part of phi1 that is not periodic in x (a kink)."""

    speed: float

    def sample(self, x: np.ndarray, order: int = 0) -> np.ndarray:
        ...


class FieldPair(BaseModel):
    """
    The state (phi1, phi2).

    ``phi1`` holds the periodic sampled part of the potential; the physical
    potential is ``phi1 + background(x)`` when a background is attached.
    """
    phi1: Field2D
    phi2: Field2D
    background: Optional[Any] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _check_grids(self) -> "FieldPair":
        if self.background is not None and not isinstance(self.background, Background):
            raise BLError(Code.E0103, message="background must provide speed and sample(x, order)")
        if not self.phi1.grid.same_as(self.phi2.grid):
            raise BLError(Code.E0103, message="phi1 and phi2 live on different grids")
        return self

    @property
    def grid(self) -> Grid2D:
        return self.phi1.grid

    @classmethod
    def zeros(cls, grid: Grid2D, background: Optional[Background] = None) -> "FieldPair":
        return cls(phi1=Field2D.zeros(grid), phi2=Field2D.zeros(grid), background=background)

    @classmethod
    def from_arrays(cls, grid: Grid2D, phi1: np.ndarray, phi2: np.ndarray,
                    background: Optional[Background] = None) -> "FieldPair":
        return cls(phi1=Field2D(grid=grid, values=phi1), phi2=Field2D(grid=grid, values=phi2),
                   background=background)

    def with_values(self, phi1: np.ndarray, phi2: np.ndarray) -> "FieldPair":
        return FieldPair.from_arrays(self.grid, phi1, phi2, self.background)

    def background_values(self, order: int = 0) -> np.ndarray:
        """Background (or its x-derivative of ``order``) broadcast to (1, nx)."""
        if self.background is None:
            return np.zeros((1, self.grid.nx))
        return np.asarray(self.background.sample(self.grid.x, order)).reshape(1, -1)

    def physical_phi1(self) -> np.ndarray:
        return self.phi1.values + self.background_values()

    def is_finite(self) -> bool:
        return self.phi1.is_finite() and self.phi2.is_finite()

    def __add__(self, other: "FieldPair") -> "FieldPair":
        return FieldPair(phi1=self.phi1 + other.phi1, phi2=self.phi2 + other.phi2, background=self.background)

    def __sub__(self, other: "FieldPair") -> "FieldPair":
        return FieldPair(phi1=self.phi1 - other.phi1, phi2=self.phi2 - other.phi2, background=self.background)

    def scaled(self, factor: float) -> "FieldPair":
        return FieldPair(phi1=self.phi1 * factor, phi2=self.phi2 * factor, background=self.background)


def seam_tail(values: np.ndarray, width: int = 1) -> float:
    """Largest magnitude within ``width`` columns of the x-seam."""
    arr = np.asarray(values)
    return float(max(np.max(np.abs(arr[..., :width])), np.max(np.abs(arr[..., -width:]))))
