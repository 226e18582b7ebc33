from functools import cached_property
import numpy as np
from pydantic import BaseModel, model_validator
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import GridSpec

_FFT_WORKERS = 1


def set_fft_workers(workers: int) -> None:
    """Thread count handed to scipy.fft as ``workers``."""
    global _FFT_WORKERS  # pylint: disable=global-statement
    _FFT_WORKERS = max(1, int(workers))


def fft_workers() -> int:
    return _FFT_WORKERS


class Grid2D(BaseModel):
    """
    Periodic box [-Lx/2, Lx/2) x [-Ly/2, Ly/2).

    Sampled arrays have shape (ny, nx) with x varying fastest. Half-spectra
    from rfft2 have shape (ny, nx // 2 + 1).
    """
    lx: float
    ly: float
    nx: int
    ny: int

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check(self) -> "Grid2D":
        if self.nx < 8 or self.ny < 8 or self.nx % 2 or self.ny % 2:
            raise BLError(Code.E0101, message=f"Sample counts must be even and >= 8, got ({self.nx}, {self.ny})")
        if not (self.lx > 0 and self.ly > 0 and np.isfinite(self.lx) and np.isfinite(self.ly)):
            raise BLError(Code.E0101, message=f"Box lengths must be positive, got ({self.lx}, {self.ly})")
        return self

    def key(self) -> tuple:
        return (self.lx, self.ly, self.nx, self.ny)

    def same_as(self, other: "Grid2D") -> bool:
        return self.key() == other.key()

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def spectral_shape(self) -> tuple:
        return (self.ny, self.nx // 2 + 1)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.lx + self.dx * np.arange(self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return -0.5 * self.ly + self.dy * np.arange(self.ny)

    @cached_property
    def xi(self) -> np.ndarray:
        """Full x-wavenumber set in DFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    @cached_property
    def eta(self) -> np.ndarray:
        """Full y-wavenumber set in DFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)

    @cached_property
    def kx(self) -> np.ndarray:
        """x-wavenumbers of the half spectrum, shape (1, nx//2+1)."""
        return (2.0 * np.pi * np.fft.rfftfreq(self.nx, d=self.dx))[None, :]

    @cached_property
    def ky(self) -> np.ndarray:
        """y-wavenumbers of the half spectrum, shape (ny, 1)."""
        return self.eta[:, None]

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx ** 2 + self.ky ** 2

    @cached_property
    def ikx(self) -> np.ndarray:
        """Symbol of d/dx with the Nyquist column zeroed."""
        sym = 1j * np.broadcast_to(self.kx, self.spectral_shape).copy()
        sym[:, self.nx // 2] = 0.0
        return sym

    @cached_property
    def iky(self) -> np.ndarray:
        """Symbol of d/dy with the Nyquist row zeroed."""
        sym = 1j * np.broadcast_to(self.ky, self.spectral_shape).copy()
        sym[self.ny // 2, :] = 0.0
        return sym

    @cached_property
    def mode_index(self) -> tuple:
        """Integer mode numbers (j over x, k over y) of the half spectrum."""
        j = np.arange(self.nx // 2 + 1)[None, :]
        k = np.fft.fftfreq(self.ny, d=1.0 / self.ny).astype(int)[:, None]
        return j, k

    def mesh(self) -> tuple:
        return np.meshgrid(self.x, self.y)


def make_grid(lx: float, ly: float, nx: int, ny: int) -> Grid2D:
    return Grid2D(lx=lx, ly=ly, nx=nx, ny=ny)


def grid_from_spec(spec: GridSpec) -> Grid2D:
    return Grid2D(lx=spec.lx, ly=spec.ly, nx=spec.nx, ny=spec.ny)
