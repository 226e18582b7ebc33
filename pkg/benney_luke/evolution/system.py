"""The Benney-Luke system as a linear 2x2 block per Fourier mode plus an
explicit part.

States handed to the integrators are complex half spectra stacked as
``u[0] = FFT(P)`` and ``u[1] = FFT(phi2)``, where ``P`` is the periodic part
of phi1. In a frame moving at speed ``s`` the rates are

    dP/dt    = phi2 + s P_x + c_b Theta'
    dphi2/dt = B^-1 A Lap P + s phi2_x + B^-1 A Theta''
               - B^-1 (phi2 Lap phi + 2 grad phi . grad phi2)

with ``phi = P + Theta`` and ``Theta`` the kink background of speed ``c_b``.
The terms in ``P`` and ``phi2`` that are linear and have constant
coefficients form the block ``L``; everything else is explicit.
"""

from typing import NamedTuple, Optional
import numpy as np
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import PhysParams
from benney_luke.spectral.dealias import dealias_mask
from benney_luke.spectral.fields import Background, FieldPair, transform, inverse_transform
from benney_luke.spectral.grid import Grid2D
from benney_luke.spectral.multipliers import a_symbol, b_inverse_symbol, laplacian_symbol, omega_squared


def apply_block(matrix: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Per-mode product of a (2, 2, ...) block with a stacked (2, ...) state."""
    return np.einsum("ij...,j...->i...", matrix, u)


def block_function(values_plus: np.ndarray, values_minus: np.ndarray, omega: np.ndarray,
                   at_zero: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Assemble g(L) as a (2, 2, ...) block from g at the eigenvalues of
    ``L = i s k_x + [[0, 1], [-omega^2, 0]]`` (eigenvectors (1, +-i omega)).

    Modes with omega = 0 are not diagonalizable; ``at_zero`` supplies their
    block directly.
    """
    safe = np.where(omega > 0, omega, 1.0)
    total = 0.5 * (values_plus + values_minus)
    diff = 0.5 * (values_plus - values_minus)
    block = np.empty((2, 2) + np.shape(omega), dtype=complex)
    block[0, 0] = total
    block[0, 1] = diff / (1j * safe)
    block[1, 0] = 1j * safe * diff
    block[1, 1] = total
    if at_zero is not None:
        zero = omega == 0
        for i in range(2):
            for j in range(2):
                block[i, j] = np.where(zero, at_zero[i, j], block[i, j])
    return block


class StateDerivatives(NamedTuple):
    """Physical derivatives of a FieldPair, background included."""
    phi_x: np.ndarray
    phi_y: np.ndarray
    phi_lap: np.ndarray
    psi: np.ndarray
    psi_x: np.ndarray
    psi_y: np.ndarray
    psi_lap: np.ndarray


def spectral_state_derivatives(u: np.ndarray, grid: Grid2D, background: Optional[Background]) -> StateDerivatives:
    """Derivatives of the physical fields from the stacked half spectra ``u``."""
    lap = laplacian_symbol(grid)
    phi_x = inverse_transform(grid.ikx * u[0], grid)
    phi_y = inverse_transform(grid.iky * u[0], grid)
    phi_lap = inverse_transform(lap * u[0], grid)
    if background is not None:
        theta1 = np.asarray(background.sample(grid.x, 1)).reshape(1, -1)
        theta2 = np.asarray(background.sample(grid.x, 2)).reshape(1, -1)
        phi_x = phi_x + theta1
        phi_lap = phi_lap + theta2
    return StateDerivatives(
        phi_x=phi_x,
        phi_y=phi_y,
        phi_lap=phi_lap,
        psi=inverse_transform(u[1], grid),
        psi_x=inverse_transform(grid.ikx * u[1], grid),
        psi_y=inverse_transform(grid.iky * u[1], grid),
        psi_lap=inverse_transform(lap * u[1], grid),
    )


def state_derivatives(state: FieldPair) -> StateDerivatives:
    return spectral_state_derivatives(stack_state(state), state.grid, state.background)


def stack_state(state: FieldPair) -> np.ndarray:
    return np.stack([state.phi1.spectrum, state.phi2.spectrum])


def unstack_state(u: np.ndarray, template: FieldPair, background: Optional[Background] = None) -> FieldPair:
    grid = template.grid
    return FieldPair.from_arrays(grid, inverse_transform(u[0], grid), inverse_transform(u[1], grid),
                                 background if background is not None else template.background)


def nonlinear_term(d: StateDerivatives) -> np.ndarray:
    """phi2 Lap phi + 2 grad phi . grad phi2, sampled."""
    return d.psi * d.phi_lap + 2.0 * (d.phi_x * d.psi_x + d.phi_y * d.psi_y)


class BLSystem:
    """
    Linear block, exact propagator and explicit part of the system on one
    grid, in a frame moving at ``frame_speed``.

    :param params: dispersion coefficients
    :param grid: periodic box
    :param frame_speed: speed s of the frame the state is stored in
    :param dealias: apply the 2/3 mask to the quadratic products
    :param linear_only: drop the quadratic products from the explicit part
    """

    def __init__(self, params: PhysParams, grid: Grid2D, frame_speed: float = 0.0,
                 dealias: bool = True, linear_only: bool = False):
        self.params = params
        self.grid = grid
        self.frame_speed = float(frame_speed)
        self.dealias = dealias
        self.linear_only = linear_only
        self._b_inv = b_inverse_symbol(params, grid)
        self._b_inv_a = self._b_inv * a_symbol(params, grid)
        self._mask = dealias_mask(grid) if dealias else np.ones(grid.spectral_shape, dtype=bool)
        self.omega = np.sqrt(omega_squared(params, grid.k2))
        # shift part of L; the Nyquist column carries no d/dx
        self.shift = self.frame_speed * grid.ikx

    def linear_symbol(self) -> np.ndarray:
        """The (2, 2, ny, nx//2+1) block L per mode."""
        block = np.zeros((2, 2) + self.grid.spectral_shape, dtype=complex)
        block[0, 0] = self.shift
        block[0, 1] = 1.0
        block[1, 0] = -self.omega ** 2
        block[1, 1] = self.shift
        return block

    def eigenvalues(self) -> tuple:
        """Eigenvalues i s k_x +- i omega of L per mode."""
        return self.shift + 1j * self.omega, self.shift - 1j * self.omega

    def propagator(self, h: float) -> np.ndarray:
        """exp(h L) per mode: phase exp(i s k_x h) times the rotation in (P, phi2)."""
        wh = self.omega * h
        phase = np.exp(self.shift * h)
        block = np.empty((2, 2) + self.grid.spectral_shape, dtype=complex)
        block[0, 0] = phase * np.cos(wh)
        block[0, 1] = phase * h * np.sinc(wh / np.pi)
        block[1, 0] = -phase * self.omega * np.sin(wh)
        block[1, 1] = phase * np.cos(wh)
        return block

    def explicit(self, u: np.ndarray, background: Optional[Background] = None) -> np.ndarray:
        """Background forcing and quadratic products as stacked half spectra."""
        grid = self.grid
        out = np.zeros_like(u, dtype=complex)
        if background is not None:
            theta1 = np.broadcast_to(np.asarray(background.sample(grid.x, 1)).reshape(1, -1), grid.shape)
            theta2 = np.broadcast_to(np.asarray(background.sample(grid.x, 2)).reshape(1, -1), grid.shape)
            out[0] = background.speed * transform(theta1)
            out[1] = self._b_inv_a * transform(theta2)
        if not self.linear_only:
            products = nonlinear_term(spectral_state_derivatives(u, grid, background))
            out[1] -= self._b_inv * np.where(self._mask, transform(products), 0.0)
        return out

    def physical_rate(self, state: FieldPair) -> FieldPair:
        """
        Lab-frame rates (phi2, B^-1 A Lap phi - B^-1 (phi2 Lap phi + 2 grad phi . grad phi2))
        of the physical fields, background included.
        """
        grid = self.grid
        d = state_derivatives(state)
        rate2_spec = self._b_inv_a * transform(d.phi_lap)
        if not self.linear_only:
            rate2_spec = rate2_spec - self._b_inv * np.where(self._mask, transform(nonlinear_term(d)), 0.0)
        rate2 = inverse_transform(rate2_spec, grid)
        if not np.all(np.isfinite(rate2)):
            raise BLError(Code.E0301, message="non-finite values in the right-hand side")
        return FieldPair.from_arrays(grid, d.psi, rate2)


def rhs_bl(state: FieldPair, params: PhysParams, dealias: bool = True) -> FieldPair:
    """Right-hand side of the first-order system for the physical state."""
    if not state.is_finite():
        raise BLError(Code.E0301, message="non-finite values in the state")
    return BLSystem(params, state.grid, dealias=dealias).physical_rate(state)


def linear_symbol(params: PhysParams, grid: Grid2D) -> np.ndarray:
    return BLSystem(params, grid, linear_only=True).linear_symbol()
