"""The linearized operator around a line solitary wave, per transverse mode.

For the transverse wavenumber eta the operator acting on (u1, u2)(z) is

    L_c(eta) = c d/dz + [[0, 1], [B(eta)^-1 A(eta) (d^2 - eta^2), 0]]
               - B(eta)^-1 [[0, 0], [v1(eta), v2]]
    v1(eta) = 2 r_c' d/dz + r_c (d^2 - eta^2),   v2 = 2 q_c d/dz + q_c'

with A(eta) = 1 + a eta^2 - a d^2 and B(eta) = 1 + b eta^2 - b d^2. It
always acts on samples conjugated by exp(alpha z), where d/dz is the
multiplier ik - alpha. ``expansion`` is the eta^2 coefficient at eta = 0,

    L_1(0) = B0^-1 (1 - A0 - B0^-1 A0) E21 + B0^-1 r_c E21
             + b B0^-2 (v1(0) E21 + v2 E22).
"""

from typing import NamedTuple
import numpy as np
from benney_luke.common.models import PhysParams
from benney_luke.soliton.profile import SolitonProfile, soliton_profile
from benney_luke.linear1d.grid1d import Grid1D


class Potentials(NamedTuple):
    """Samples of r_c, r_c', q_c, q_c' (or of their c-derivatives)."""
    r: np.ndarray
    r1: np.ndarray
    q: np.ndarray
    q1: np.ndarray


def profile_potentials(profile: SolitonProfile, z: np.ndarray, dc: int = 0) -> Potentials:
    return Potentials(r=profile.r(z, 0, dc), r1=profile.r(z, 1, dc), q=profile.q(z, 0, dc), q1=profile.q(z, 1, dc))


class LinearizedBL:
    """
    Matrix-free and dense forms of L_c(eta) and of its expansion on one
    Grid1D. Construction checks the grid against the profile tails.

    :param params: dispersion coefficients
    :param profile: the solitary wave linearized around
    :param grid: weighted collocation grid
    """

    def __init__(self, params: PhysParams, profile: SolitonProfile, grid: Grid1D):
        grid.check_tails(profile)
        self.params = params
        self.profile = profile
        self.grid = grid
        self.c = profile.c
        self.s = grid.derivative_symbol(1.0)
        self.potentials = profile_potentials(profile, grid.z)
        self._b0_inv = 1.0 / (1.0 - params.b * self.s ** 2)

    def _symbols(self, eta: float) -> tuple:
        a, b = self.params.a, self.params.b
        lap = self.s ** 2 - eta ** 2
        b_inv = 1.0 / (1.0 + b * eta ** 2 - b * self.s ** 2)
        return lap, b_inv, b_inv * (1.0 + a * eta ** 2 - a * self.s ** 2) * lap

    def d(self, values: np.ndarray) -> np.ndarray:
        return self.grid.apply(self.s, values)

    def b0_inverse(self, values: np.ndarray) -> np.ndarray:
        return self.grid.apply(self._b0_inv, values)

    @staticmethod
    def _potential_terms(pot: Potentials, d1, lap1, d2, u2) -> np.ndarray:
        return 2.0 * pot.r1 * d1 + pot.r * lap1 + 2.0 * pot.q * d2 + pot.q1 * u2

    def apply(self, w: np.ndarray, eta: float = 0.0) -> np.ndarray:
        """L_c(eta) applied to conjugated samples ``w`` of shape (2, n)."""
        grid = self.grid
        lap, b_inv, dispersion = self._symbols(eta)
        u1, u2 = w
        d1, d2 = self.d(u1), self.d(u2)
        terms = self._potential_terms(self.potentials, d1, grid.apply(lap, u1), d2, u2)
        return np.stack([self.c * d1 + u2,
                         grid.apply(dispersion, u1) + self.c * d2 - grid.apply(b_inv, terms)])

    def _expansion_row(self, w: np.ndarray, pot: Potentials, constant_part: bool) -> np.ndarray:
        grid, a, b = self.grid, self.params.a, self.params.b
        u1, u2 = w
        d1, d2 = self.d(u1), self.d(u2)
        terms = self._potential_terms(pot, d1, grid.apply(self.s ** 2, u1), d2, u2)
        row = b * grid.apply(self._b0_inv ** 2, terms) + self.b0_inverse(pot.r * u1)
        if constant_part:
            a0 = 1.0 - a * self.s ** 2
            row = row + grid.apply(self._b0_inv * (1.0 - a0 - self._b0_inv * a0), u1)
        return np.stack([np.zeros_like(row), row])

    def expansion(self, w: np.ndarray) -> np.ndarray:
        """L_{1,c}(0) applied to ``w``."""
        return self._expansion_row(w, self.potentials, True)

    def expansion_dc(self, w: np.ndarray) -> np.ndarray:
        """(d/dc L_{1,c}(0)) applied to ``w``, the c-dependence of the potentials only."""
        return self._expansion_row(w, profile_potentials(self.profile, self.grid.z, dc=1), False)

    def matrix(self, eta: float = 0.0) -> np.ndarray:
        """Dense real (2n, 2n) matrix of L_c(eta)."""
        grid, pot = self.grid, self.potentials
        lap, b_inv, dispersion = self._symbols(eta)
        d = grid.matrix(self.s)
        b_inv_m = grid.matrix(b_inv)
        eye = np.eye(grid.n)
        row1 = 2.0 * pot.r1[:, None] * d + pot.r[:, None] * grid.matrix(lap)
        row2 = 2.0 * pot.q[:, None] * d + np.diag(pot.q1)
        return np.block([
            [self.c * d, eye],
            [grid.matrix(dispersion) - b_inv_m @ row1, self.c * d - b_inv_m @ row2],
        ])

    def expansion_matrix(self) -> np.ndarray:
        """Dense real (2n, 2n) matrix of L_{1,c}(0)."""
        grid, pot, a, b = self.grid, self.potentials, self.params.a, self.params.b
        d = grid.matrix(self.s)
        b0_inv = grid.matrix(self._b0_inv)
        b0_inv2 = grid.matrix(self._b0_inv ** 2)
        a0 = 1.0 - a * self.s ** 2
        left = (grid.matrix(self._b0_inv * (1.0 - a0 - self._b0_inv * a0)) + b0_inv * pot.r[None, :]
                + b * b0_inv2 @ (2.0 * pot.r1[:, None] * d + pot.r[:, None] * grid.matrix(self.s ** 2)))
        right = b * b0_inv2 @ (2.0 * pot.q[:, None] * d + np.diag(pot.q1))
        zeros = np.zeros((grid.n, grid.n))
        return np.block([[zeros, zeros], [left, right]])


def build_linearized(params: PhysParams, c: float, eta: float, grid: Grid1D) -> np.ndarray:
    """Dense matrix of exp(alpha z) L_c(eta) exp(-alpha z) on ``grid``."""
    return LinearizedBL(params, soliton_profile(params, c), grid).matrix(eta)


def expansion_operator(params: PhysParams, c: float, grid: Grid1D) -> np.ndarray:
    """Dense matrix of the eta^2 coefficient L_{1,c}(0) on ``grid``."""
    return LinearizedBL(params, soliton_profile(params, c), grid).expansion_matrix()
