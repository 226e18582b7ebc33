from typing import Callable, Optional, Union
import numpy as np
from benney_luke.common.error import BLError, Code
from benney_luke.spectral.fields import Field2D, FieldPair

Weight = Union[None, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def _pairs(u, v):
    if isinstance(u, FieldPair) and isinstance(v, FieldPair):
        return [(u.phi1, v.phi1), (u.phi2, v.phi2)]
    if isinstance(u, Field2D) and isinstance(v, Field2D):
        return [(u, v)]
    raise BLError(Code.E0103, message="inner products need two fields or two pairs")


def weighted_inner_product(u, v, weight: Weight = None, spacing: Optional[float] = None) -> float:
    """
    Quadrature of the sum over components of the integral of u * v * weight.

    ``u`` and ``v`` are Field2D, FieldPair or equally shaped sample arrays
    (1D sections). For fields the weight is a function of x; for arrays it
    is an array of samples and ``spacing`` is the cell size.
    """
    if isinstance(u, np.ndarray) or isinstance(v, np.ndarray):
        u_arr, v_arr = np.asarray(u), np.asarray(v)
        if u_arr.shape != v_arr.shape:
            raise BLError(Code.E0103, details={"left": u_arr.shape, "right": v_arr.shape})
        if spacing is None:
            raise BLError(Code.E0103, message="array inner products need the cell spacing")
        w = 1.0 if weight is None else np.asarray(weight)
        return float(np.sum(u_arr * v_arr * w) * spacing)

    total = 0.0
    for left, right in _pairs(u, v):
        if not left.grid.same_as(right.grid):
            raise BLError(Code.E0103, details={"left": left.grid.key(), "right": right.grid.key()})
        grid = left.grid
        if weight is None:
            w = 1.0
        elif callable(weight):
            w = np.asarray(weight(grid.x)).reshape(1, -1)
        else:
            w = np.asarray(weight)
        total += float(np.sum(left.values * right.values * w)) * grid.cell_area
    return total


def spectral_inner_product(u, v) -> float:
    """Parseval partner of the plain inner product, computed from half spectra."""
    total = 0.0
    for left, right in _pairs(u, v):
        if not left.grid.same_as(right.grid):
            raise BLError(Code.E0103, details={"left": left.grid.key(), "right": right.grid.key()})
        grid = left.grid
        fold = np.full(grid.nx // 2 + 1, 2.0)
        fold[0] = 1.0
        fold[-1] = 1.0
        products = (left.spectrum * np.conj(right.spectrum)).real * fold[None, :]
        total += float(np.sum(products)) * grid.cell_area / (grid.nx * grid.ny)
    return total
