"""Coefficients of the modulation equations of a line solitary wave.

    m_kj = <L_1(0) zeta_j, zeta_k*>        j = 1, 2
    m_kj = <Phi_j, zeta_k*>                j = 3, 4, 5
    Phi_3 = d_c(L_1(0) zeta1) + B0^-1 r_c' d_c phi_c e2
    Phi_4 = d_c(L_1(0) zeta2) - B0^-1 d_c r_c d_c phi_c e2
    Phi_5 = -d_z(L_1(0) zeta1) - B0^-1 r_c' q_c e2
    a_1j = (beta2 m_2j - beta1 m_1j) / beta1^2,   a_2j = -m_2j / beta1

lambda1^2 = -m_21 / <zeta2, zeta2*> and lambda2 = (a_11 + a_22) / 2 in
its pairing form; nu = (a_11 - a_22) / 2, p1 = -rho''(c0) / 2 and
p3 = (lambda1^2 p1 + a_15 + 2 a_23) / 2.
"""

from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Union
import numpy as np
import yaml
from numpy.polynomial import Chebyshev
from pydantic import BaseModel, model_validator
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.models import PhysParams
from benney_luke.soliton.profile import soliton_profile
from benney_luke.linear1d.grid1d import Grid1D, VectorPair1D, grid1d_for
from benney_luke.linear1d.operator import LinearizedBL
from benney_luke.linear1d.zeta import ZetaBasis, zeta_basis

RHO_NODES = 9
RHO_TABLE = 129


class CoefficientCore(BaseModel):
    """Pairings and m_kj at one speed, before any derived quantity."""
    c: float
    pairings: Dict[str, float]
    m: List[List[float]]
    m_imag: float

    @property
    def beta1(self) -> float:
        return self.pairings["z1_z1s"]

    @property
    def beta2(self) -> float:
        return self.pairings["z2_z1s"]

    def a_table(self) -> List[List[float]]:
        b1, b2 = self.beta1, self.beta2
        first = [(b2 * m2 - b1 * m1) / b1 ** 2 for m1, m2 in zip(self.m[0], self.m[1])]
        second = [-m2 / b1 for m2 in self.m[1]]
        return [first, second]


def _e2(values: np.ndarray) -> np.ndarray:
    return np.stack([np.zeros_like(values), values])


def coefficient_core(params: PhysParams, c: float, grid: Optional[Grid1D] = None,
                     basis: Optional[ZetaBasis] = None) -> CoefficientCore:
    profile = soliton_profile(params, c)
    grid = grid or grid1d_for(profile)
    basis = basis or zeta_basis(params, c, grid)
    op = LinearizedBL(params, profile, grid)
    z, weight = grid.z, grid.weight(1.0)

    w1, w2 = basis.zeta1.values, basis.zeta2.values
    dzeta1 = np.stack([profile.q(z, dc=1), profile.r(z, 1, dc=1)]) * weight
    dzeta2 = -np.stack([profile.phi(z, dc=2), profile.r(z, dc=2)]) * weight
    dphi = profile.phi(z, dc=1)
    l1z1 = op.expansion(w1)
    phis = [
        l1z1,
        op.expansion(w2),
        op.expansion_dc(w1) + op.expansion(dzeta1) + _e2(op.b0_inverse(profile.r(z, 1) * dphi * weight)),
        op.expansion_dc(w2) + op.expansion(dzeta2) - _e2(op.b0_inverse(profile.r(z, dc=1) * dphi * weight)),
        -op.d(l1z1) - _e2(op.b0_inverse(profile.r(z, 1) * profile.q(z) * weight)),
    ]
    m, imag = [], 0.0
    for k in (1, 2):
        row = []
        for phi in phis:
            value = VectorPair1D(grid=grid, values=phi, rate=1).pair(basis.adjoint(k))
            row.append(value.real)
            imag = max(imag, abs(value.imag))
        m.append(row)
    return CoefficientCore(c=c, pairings=basis.pairings, m=m, m_imag=imag)


class ModulationCoefficients(BaseModel):
    """
    Scalar coefficients of the modulation equations at c0. ``m`` and ``a``
    are 2 x 5 tables indexed [k-1][j-1]. Sign invariants are checked on
    construction (E0402), the band edge against |nu| eta0 < lambda1 (E0504).
    """
    c0: float
    alpha: float
    n: int
    length: float
    beta1: float
    beta2: float
    zeta2_pairing: float
    m: List[List[float]]
    a: List[List[float]]
    lambda1: float
    lambda2: float
    nu: float
    p1: float
    p3: float
    rho_second: float
    eta0: Optional[float] = None

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_signs(self) -> "ModulationCoefficients":
        violations = []
        if self.beta1 <= 0 or self.beta2 <= 0:
            violations.append("beta1 and beta2 must be positive")
        if self.mkj(1, 1) >= 0 or self.mkj(2, 2) >= 0:
            violations.append("m11 = m22 < 0 fails")
        if self.mkj(2, 1) >= 0:
            violations.append("m21 < 0 fails")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            violations.append("lambda1 and lambda2 must be positive")
        if violations:
            raise BLError(Code.E0402, message="; ".join(violations), details=self.to_report())
        if self.eta0 is not None and abs(self.nu) * self.eta0 >= self.lambda1:
            raise BLError(Code.E0504, details={"nu": self.nu, "eta0": self.eta0, "lambda1": self.lambda1})
        return self

    def mkj(self, k: int, j: int) -> float:
        return self.m[k - 1][j - 1]

    def aij(self, i: int, j: int) -> float:
        return self.a[i - 1][j - 1]

    def with_eta0(self, eta0: Optional[float]) -> "ModulationCoefficients":
        return ModulationCoefficients(**{**self.model_dump(), "eta0": eta0})

    def consistency(self) -> Dict[str, float]:
        """Relative defects of the identities the tables must satisfy."""
        scale = abs(self.mkj(1, 1))
        m_scale = max(abs(v) for row in self.m for v in row)
        return {
            "m11_m22": abs(self.mkj(1, 1) - self.mkj(2, 2)) / scale,
            "m25": abs(self.mkj(2, 5)) / m_scale,
            "a21_lambda1_sq": abs(self.aij(2, 1) - self.lambda1 ** 2) / self.lambda1 ** 2,
            "trace": abs(self.aij(1, 1) + self.aij(2, 2) - 2.0 * self.lambda2) / (2.0 * self.lambda2),
        }

    def to_report(self) -> Dict[str, Union[float, int, None]]:
        """Flat key/value form, one entry per scalar."""
        report: Dict[str, Union[float, int, None]] = {
            "c0": self.c0, "alpha": self.alpha, "n": self.n, "length": self.length,
            "beta1": self.beta1, "beta2": self.beta2,
        }
        for name, table in (("m", self.m), ("a", self.a)):
            for i, row in enumerate(table, start=1):
                for j, value in enumerate(row, start=1):
                    report[f"{name}{i}{j}"] = value
        report.update({"lambda1": self.lambda1, "lambda2": self.lambda2, "nu": self.nu,
                       "p1": self.p1, "p3": self.p3, "rho_second": self.rho_second, "eta0": self.eta0})
        return report

    def dump_yaml(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump({key: (float(v) if isinstance(v, float) else v) for key, v in self.to_report().items()},
                           f, sort_keys=False)
        return path


def _chebyshev_nodes(lo: float, hi: float, count: int) -> np.ndarray:
    theta = np.pi * (np.arange(count) + 0.5) / count
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(theta)[::-1]


class RhoMap:
    """
    The change of variable b = rho(c) - rho(c0) with

        a21~(c) = a21(c0) exp(int_c0^c 2 a23 / a21),   rho(c) = int_c0^c a21~ / a21.

    a21 and a23 are sampled at Chebyshev nodes of [c0 - w, c0 + w] (each
    on its own Grid1D) and interpolated; rho, rho' and a21~ are then
    tabulated by adaptive quadrature and splined for array evaluation.
    """

    def __init__(self, params: PhysParams, c0: float, half_width: Optional[float] = None,
                 nodes: int = RHO_NODES, n: int = 384, decay: float = 32.0):
        self.params = params
        self.c0 = c0
        self.half_width = min(0.25 * (abs(c0) - 1.0), 0.05) if half_width is None else half_width
        lo, hi = c0 - self.half_width, c0 + self.half_width
        self.nodes = _chebyshev_nodes(lo, hi, nodes)
        a21, a23 = [], []
        for c in self.nodes:
            table = coefficient_core(params, float(c), grid1d_for(soliton_profile(params, float(c)), n=n,
                                                                   decay=decay)).a_table()
            a21.append(table[1][0])
            a23.append(table[1][2])
        self.a21 = Chebyshev.fit(self.nodes, a21, deg=nodes - 1, domain=[lo, hi])
        self.a23 = Chebyshev.fit(self.nodes, a23, deg=nodes - 1, domain=[lo, hi])
        self.a21_c0 = float(self.a21(c0))
        internal_logger.debug(f"rho map on [{lo:.6f}, {hi:.6f}] from {nodes} speeds")

    def _exponent(self, c: float) -> float:
        return quad(lambda s: 2.0 * self.a23(s) / self.a21(s), self.c0, c, epsabs=1e-13, epsrel=1e-12)[0]

    def a21_tilde(self, c: float) -> float:
        return float(self.a21_c0 * np.exp(self._exponent(c)))

    def rho_prime(self, c: float) -> float:
        return float(np.exp(self._exponent(c)) * self.a21_c0 / self.a21(c))

    def rho(self, c: float) -> float:
        return float(quad(self.rho_prime, self.c0, c, epsabs=1e-12, epsrel=1e-10)[0])

    def rho_second(self, step: Optional[float] = None) -> float:
        """rho''(c0) by Richardson extrapolation of central differences of rho'."""
        h = 0.25 * self.half_width if step is None else step

        def central(width: float) -> float:
            return (self.rho_prime(self.c0 + width) - self.rho_prime(self.c0 - width)) / (2.0 * width)

        return (4.0 * central(0.5 * h) - central(h)) / 3.0

    def rho_second_closed_form(self) -> float:
        """(2 a23(c0) - a21'(c0)) / a21(c0), from the interpolants."""
        return float((2.0 * self.a23(self.c0) - self.a21.deriv()(self.c0)) / self.a21(self.c0))

    @cached_property
    def _tables(self) -> tuple:
        speeds = np.linspace(self.c0 - self.half_width, self.c0 + self.half_width, RHO_TABLE)
        middle = RHO_TABLE // 2
        rho = np.zeros(RHO_TABLE)
        for i in range(middle + 1, RHO_TABLE):
            rho[i] = rho[i - 1] + quad(self.rho_prime, speeds[i - 1], speeds[i])[0]
        for i in range(middle - 1, -1, -1):
            rho[i] = rho[i + 1] - quad(self.rho_prime, speeds[i], speeds[i + 1])[0]
        tilde = np.array([self.a21_tilde(float(c)) for c in speeds])
        return speeds, rho, tilde

    @cached_property
    def _splines(self) -> dict:
        speeds, rho, tilde = self._tables
        return {"rho": CubicSpline(speeds, rho), "speed": CubicSpline(rho, speeds),
                "p2": CubicSpline(rho, tilde - self.a21_c0)}

    def _inside(self, values: np.ndarray, low: float, high: float, name: str) -> None:
        if np.any(values < low) or np.any(values > high):
            raise BLError(Code.E0503, message=f"{name} left the tabulated range of the rho map",
                          details={"min": float(np.min(values)), "max": float(np.max(values)),
                                   "range": [low, high]})

    def b_of_speed(self, c) -> np.ndarray:
        """b = rho(c) - rho(c0) for an array of speeds."""
        c = np.asarray(c, dtype=float)
        self._inside(c, self.c0 - self.half_width, self.c0 + self.half_width, "speed")
        return self._splines["rho"](c)

    def speed_of_b(self, b) -> np.ndarray:
        _, rho, _ = self._tables
        b = np.asarray(b, dtype=float)
        self._inside(b, rho[0], rho[-1], "b")
        return self._splines["speed"](b)

    def p2_of_b(self, b) -> np.ndarray:
        """p2(c) = a21~(c) - a21~(c0) with c recovered from b."""
        _, rho, _ = self._tables
        b = np.asarray(b, dtype=float)
        self._inside(b, rho[0], rho[-1], "b")
        return self._splines["p2"](b)


def resonant_rates(core: CoefficientCore) -> tuple:
    """(lambda1, lambda2) of the resonant branch i lambda1 eta - lambda2 eta^2."""
    pairings = core.pairings
    m21 = core.m[1][0]
    if m21 >= 0:
        raise BLError(Code.E0402, message="lambda1^2 <= 0 (m21 >= 0)", details={"m": core.m, "pairings": pairings})
    lambda1 = float(np.sqrt(m21 / -pairings["z2_z2s"]))
    lambda2 = ((m21 * pairings["z2_z1s"] - core.m[0][0] * pairings["z2_z2s"] - core.m[1][1] * pairings["z1_z1s"])
               / (2.0 * pairings["z1_z1s"] * pairings["z2_z2s"]))
    return lambda1, float(lambda2)


def modulation_coefficients(params: PhysParams, c0: float, grid: Optional[Grid1D] = None,
                            rho_map: Optional[RhoMap] = None, eta0: Optional[float] = None) -> ModulationCoefficients:
    """All scalar coefficients at c0 (see the module docstring)."""
    profile = soliton_profile(params, c0)
    grid = grid or grid1d_for(profile)
    core = coefficient_core(params, c0, grid)
    lambda1, lambda2 = resonant_rates(core)
    a = core.a_table()
    rho_map = rho_map or RhoMap(params, c0, n=grid.n)
    rho_second = rho_map.rho_second()
    p1 = -0.5 * rho_second
    if core.m_imag > 1e-8 * max(abs(v) for row in core.m for v in row):
        internal_logger.warning(f"m tables carry an imaginary part of {core.m_imag:.3e}")
    return ModulationCoefficients(
        c0=c0, alpha=grid.alpha, n=grid.n, length=grid.length,
        beta1=core.beta1, beta2=core.beta2, zeta2_pairing=core.pairings["z2_z2s"],
        m=core.m, a=a, lambda1=lambda1, lambda2=lambda2,
        nu=0.5 * (a[0][0] - a[1][1]), p1=p1, p3=0.5 * (lambda1 ** 2 * p1 + a[0][4] + 2.0 * a[1][2]),
        rho_second=rho_second, eta0=eta0,
    )


def a_matrix(coeffs: ModulationCoefficients, eta) -> np.ndarray:
    """A(c0, eta) = E12 - [a_ij] eta^2 1_{|eta| <= eta0}, shape (2, 2) + shape(eta)."""
    eta = np.asarray(eta, dtype=float)
    band = np.ones_like(eta) if coeffs.eta0 is None else (np.abs(eta) <= coeffs.eta0).astype(float)
    damping = eta ** 2 * band
    out = np.empty((2, 2) + eta.shape)
    for i in range(2):
        for j in range(2):
            out[i, j] = -coeffs.a[i][j] * damping
    out[0, 1] += 1.0
    return out


def a_determinant(coeffs: ModulationCoefficients, eta) -> np.ndarray:
    block = a_matrix(coeffs, eta)
    return block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0]


def a_trace(coeffs: ModulationCoefficients, eta) -> np.ndarray:
    block = a_matrix(coeffs, eta)
    return block[0, 0] + block[1, 1]
