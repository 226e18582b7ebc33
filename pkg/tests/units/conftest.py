import numpy as np
import pytest
from benney_luke.common.models import PhysParams
from benney_luke.linear1d.coefficients import ModulationCoefficients
from benney_luke.soliton.profile import SolitonProfile
from benney_luke.spectral.grid import make_grid


@pytest.fixture
def params():
    """Default dispersion coefficients (a, b) = (0.5, 1)."""
    return PhysParams(a=0.5, b=1.0)


@pytest.fixture
def unit_grid():
    """2pi x 2pi box with 32 x 32 samples."""
    return make_grid(2 * np.pi, 2 * np.pi, 32, 32)


@pytest.fixture
def low_mode_grid():
    """2pi x 2pi box with 64 x 64 samples for products of low modes."""
    return make_grid(2 * np.pi, 2 * np.pi, 64, 64)


@pytest.fixture
def soliton_grid():
    """Box wide enough in x for the tails of a c = 1.5 soliton, thin in y."""
    return make_grid(60.0, 8.0, 256, 8)


@pytest.fixture
def fast_profile(params):
    return SolitonProfile(params=params, c=1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def low_mode_field(grid, rng, max_mode=3, amplitude=0.05):
    """Random real trigonometric polynomial with |j|, |k| <= max_mode."""
    xx, yy = grid.mesh()
    kx0 = 2 * np.pi / grid.lx
    ky0 = 2 * np.pi / grid.ly
    values = np.zeros(grid.shape)
    for j in range(-max_mode, max_mode + 1):
        for k in range(0, max_mode + 1):
            a, b = rng.normal(size=2)
            values += a * np.cos(j * kx0 * xx + k * ky0 * yy) + b * np.sin(j * kx0 * xx + k * ky0 * yy)
    return amplitude * values / np.max(np.abs(values))


def synthetic_coefficients(eta0=0.5, p1=0.1, **overrides):
    """
    Modulation tables with round numbers and the sign pattern of the
    physical ones: a_1j = (beta2 m_2j - beta1 m_1j) / beta1^2, a_2j = -m_2j / beta1.
    """
    beta1, beta2 = 1.0, 0.5
    m = [[-1.0, 0.2, 0.1, 0.05, 0.3],
         [-0.09, -1.0, 0.02, 0.01, 0.0]]
    a = [[(beta2 * m[1][j] - beta1 * m[0][j]) / beta1 ** 2 for j in range(5)],
         [-m[1][j] / beta1 for j in range(5)]]
    lambda1 = 0.3
    values = dict(
        c0=1.05, alpha=0.2, n=384, length=100.0, beta1=beta1, beta2=beta2, zeta2_pairing=beta1,
        m=m, a=a, lambda1=lambda1, lambda2=0.5 * (a[0][0] + a[1][1]), nu=0.5 * (a[0][0] - a[1][1]),
        p1=p1, p3=0.5 * (lambda1 ** 2 * p1 + a[0][4] + 2.0 * a[1][2]), rho_second=-2.0 * p1, eta0=eta0)
    values.update(overrides)
    return ModulationCoefficients(**values)


@pytest.fixture
def synthetic_coeffs():
    return synthetic_coefficients()
