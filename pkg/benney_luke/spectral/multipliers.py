"""Fourier multipliers on the half spectrum of a Grid2D.

Symbols are arrays broadcastable to ``grid.spectral_shape`` or callables of
``(kx, ky)``. Odd derivatives carry a zeroed Nyquist mode so that every
real symbol used here maps real fields to real fields.
"""

from typing import Callable, Union
import numpy as np
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import PhysParams
from benney_luke.spectral.fields import Field2D, transform, inverse_transform
from benney_luke.spectral.grid import Grid2D

Symbol = Union[np.ndarray, float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def evaluate_symbol(symbol: Symbol, grid: Grid2D) -> np.ndarray:
    values = symbol(grid.kx, grid.ky) if callable(symbol) else symbol
    values = np.broadcast_to(np.asarray(values), grid.spectral_shape)
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise BLError(Code.E0104, details={"mode": [int(bad[0]), int(bad[1])]})
    return values


def apply_multiplier(f: Field2D, symbol: Symbol) -> Field2D:
    """Multiply the spectrum of ``f`` by ``symbol`` and transform back."""
    values = evaluate_symbol(symbol, f.grid)
    return Field2D.from_spectrum(f.grid, f.spectrum * values)


def laplacian_symbol(grid: Grid2D) -> np.ndarray:
    return -grid.k2


def a_symbol(params: PhysParams, grid: Grid2D) -> np.ndarray:
    """Symbol of A = I - a Laplacian."""
    return 1.0 + params.a * grid.k2


def b_symbol(params: PhysParams, grid: Grid2D) -> np.ndarray:
    """Symbol of B = I - b Laplacian."""
    return 1.0 + params.b * grid.k2


def b_inverse_symbol(params: PhysParams, grid: Grid2D) -> np.ndarray:
    return 1.0 / b_symbol(params, grid)


def omega_squared(params: PhysParams, k2: np.ndarray) -> np.ndarray:
    """Linear dispersion relation omega^2 = |k|^2 (1 + a|k|^2) / (1 + b|k|^2)."""
    return k2 * (1.0 + params.a * k2) / (1.0 + params.b * k2)


def dispersion_symbol(params: PhysParams, grid: Grid2D) -> np.ndarray:
    """Symbol of B^-1 A Laplacian, which equals -omega^2."""
    return -omega_squared(params, grid.k2)


def dx(f: Field2D) -> Field2D:
    return apply_multiplier(f, f.grid.ikx)


def dy(f: Field2D) -> Field2D:
    return apply_multiplier(f, f.grid.iky)


def gradient(f: Field2D) -> tuple[Field2D, Field2D]:
    return dx(f), dy(f)


def laplacian(f: Field2D) -> Field2D:
    return apply_multiplier(f, laplacian_symbol(f.grid))


def spectral_derivatives(values: np.ndarray, grid: Grid2D, orders=("x", "y", "lap")) -> dict:
    """
    Several derivatives of one sampled array from a single forward transform.
    Keys of the result are the requested orders.
    """
    spec = transform(values)
    symbols = {"x": grid.ikx, "y": grid.iky, "lap": laplacian_symbol(grid),
               "xx": -np.broadcast_to(grid.kx ** 2, grid.spectral_shape)}
    return {name: inverse_transform(spec * symbols[name], grid) for name in orders}
