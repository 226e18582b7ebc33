from functools import lru_cache
import numpy as np
import scipy.fft as sfft
from benney_luke.spectral.fields import Field2D
from benney_luke.spectral.grid import Grid2D, fft_workers


@lru_cache(maxsize=16)
def _mask(nx: int, ny: int) -> np.ndarray:
    j = np.arange(nx // 2 + 1)[None, :]
    k = np.abs(np.fft.fftfreq(ny, d=1.0 / ny))[:, None]
    mask = (j <= nx / 3.0) & (k <= ny / 3.0)
    mask.setflags(write=False)
    return mask


def dealias_mask(grid: Grid2D) -> np.ndarray:
    """Boolean half-spectrum mask of the modes kept by the 2/3 rule."""
    return _mask(grid.nx, grid.ny)


def dealias_spectrum(spectrum: np.ndarray, grid: Grid2D) -> np.ndarray:
    return np.where(dealias_mask(grid), spectrum, 0.0)


def dealias(f: Field2D) -> Field2D:
    """Zero the modes with |j| > Nx/3 or |k| > Ny/3."""
    return Field2D.from_spectrum(f.grid, dealias_spectrum(f.spectrum, f.grid))


def padded_product(f: Field2D, g: Field2D) -> Field2D:
    """
    Alias-free product by the 3/2 padding rule, truncated back to the grid.

    Reference for the 2/3 rule: both agree on the retained band when the
    factors are themselves band limited.
    """
    grid = f.grid
    mx, my = 3 * grid.nx // 2, 3 * grid.ny // 2
    scale = (mx * my) / (grid.nx * grid.ny)

    def _pad(spec: np.ndarray) -> np.ndarray:
        full = np.zeros((my, mx // 2 + 1), dtype=complex)
        half = grid.ny // 2
        full[:half, : grid.nx // 2] = spec[:half, : grid.nx // 2]
        full[my - half + 1:, : grid.nx // 2] = spec[half + 1:, : grid.nx // 2]
        return full * scale

    fine = sfft.irfft2(_pad(f.spectrum), s=(my, mx), workers=fft_workers()) * \
        sfft.irfft2(_pad(g.spectrum), s=(my, mx), workers=fft_workers())
    fine_spec = sfft.rfft2(fine, workers=fft_workers()) / scale
    half = grid.ny // 2
    spec = np.zeros(grid.spectral_shape, dtype=complex)
    spec[:half, : grid.nx // 2] = fine_spec[:half, : grid.nx // 2]
    spec[half + 1:, : grid.nx // 2] = fine_spec[my - half + 1:, : grid.nx // 2]
    return Field2D.from_spectrum(grid, spec)
