import numpy as np
import pytest
from benney_luke.common.error import BLError
from benney_luke.spectral.dealias import dealias, dealias_mask, padded_product
from benney_luke.spectral.fields import Field2D, FieldPair
from benney_luke.spectral.grid import make_grid
from benney_luke.spectral.inner_product import spectral_inner_product, weighted_inner_product


class TestDealias:
    """
    UNIT TESTS: 2/3-rule dealiasing

    PURPOSE: Confirm which modes survive the mask and compare products with the padded oracle
    TESTING TYPE: Hybrid testing
    """

    @pytest.mark.black_box
    def test_band_limited_field_unchanged(self, unit_grid):
        field = Field2D.from_function(unit_grid, lambda x, y: np.cos(3 * x) + np.sin(5 * y))
        np.testing.assert_allclose(dealias(field).values, field.values, atol=1e-13)

    @pytest.mark.black_box
    def test_nyquist_mode_removed(self, unit_grid):
        field = Field2D.from_function(unit_grid, lambda x, y: np.cos(16 * x) + 0 * y)
        assert np.max(np.abs(dealias(field).values)) < 1e-13, "j = Nx/2 lies above the cutoff"

    @pytest.mark.white_box
    def test_mask_cutoffs(self, unit_grid):
        mask = dealias_mask(unit_grid)
        j, k = unit_grid.mode_index
        assert mask[0, 10] and not mask[0, 11], "cutoff in x should be Nx/3"
        assert np.all(mask == ((j <= 32 / 3) & (np.abs(k) <= 32 / 3)))

    @pytest.mark.hybrid
    def test_dealiased_product_matches_padded_oracle(self, unit_grid):
        f = Field2D.from_function(unit_grid, lambda x, y: np.cos(7 * x + 2 * y))
        g = Field2D.from_function(unit_grid, lambda x, y: np.sin(6 * x - 3 * y))
        dealiased = dealias(f * g)
        oracle = dealias(padded_product(f, g))
        np.testing.assert_allclose(dealiased.values, oracle.values, atol=1e-12,
                                   err_msg="on the retained band both products must agree")


class TestInnerProducts:
    """
    UNIT TESTS: weighted_inner_product and its Parseval partner

    PURPOSE: Check quadrature against closed-form integrals
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_constant_gives_area(self):
        grid = make_grid(3.0, 5.0, 16, 16)
        one = Field2D(grid=grid, values=np.ones(grid.shape))
        assert weighted_inner_product(one, one) == pytest.approx(15.0)

    @pytest.mark.black_box
    def test_sin_cos_orthogonal(self, unit_grid):
        s = Field2D.from_function(unit_grid, lambda x, y: np.sin(x) + 0 * y)
        c = Field2D.from_function(unit_grid, lambda x, y: np.cos(x) + 0 * y)
        assert abs(weighted_inner_product(s, c)) < 1e-13

    @pytest.mark.black_box
    def test_exponential_weight_on_gaussians(self):
        alpha = 0.3
        z = np.linspace(-40.0, 40.0, 4001)[:-1]
        h = z[1] - z[0]
        u = np.exp(-z ** 2)
        v = np.exp(-(z - 1.0) ** 2)
        value = weighted_inner_product(u, v, weight=np.exp(2 * alpha * z), spacing=h)
        # exp(-2 z^2 + 2 z + 2 alpha z - 1) integrates to sqrt(pi/2) exp((1 + alpha)^2 / 2 - 1)
        exact = np.sqrt(np.pi / 2) * np.exp((1 + alpha) ** 2 / 2 - 1)
        assert value == pytest.approx(exact, abs=1e-8)

    @pytest.mark.hybrid
    def test_parseval_partner(self, unit_grid, rng):
        u = FieldPair.from_arrays(unit_grid, rng.normal(size=unit_grid.shape), rng.normal(size=unit_grid.shape))
        v = FieldPair.from_arrays(unit_grid, rng.normal(size=unit_grid.shape), rng.normal(size=unit_grid.shape))
        assert spectral_inner_product(u, v) == pytest.approx(weighted_inner_product(u, v), rel=1e-12)

    @pytest.mark.white_box
    def test_grid_mismatch(self, unit_grid):
        other = make_grid(1.0, 1.0, 32, 32)
        with pytest.raises(BLError):
            weighted_inner_product(Field2D.zeros(unit_grid), Field2D.zeros(other))
