import numpy as np
import pytest

from ntksketch.cntk import cntk_trace, patch_norms, theta_cntk
from ntksketch.errors import DimensionError, ParameterError


class TestPatchNorms:
    def test_single_pixel_window_of_one(self):
        img = np.full((1, 1, 1), 3.0)
        norms = patch_norms(img, 1, 4)
        assert np.allclose(norms, 9.0)

    def test_all_ones_center_pixel(self):
        # 5x5 all-ones, q=3: N0 = 9 everywhere, N1 = 9 at the center but
        # smaller at the border under zero padding
        img = np.ones((5, 5, 1))
        norms = patch_norms(img, 3, 1)
        assert np.allclose(norms[0], 9.0)
        assert norms[1][2, 2] == pytest.approx(9.0)
        assert norms[1][0, 0] == pytest.approx(4.0)  # 2x2 window survives
        assert norms[1][0, 2] == pytest.approx(6.0)

    def test_nonnegative(self):
        rng = np.random.default_rng(0)
        img = rng.standard_normal((6, 7, 3))
        assert np.all(patch_norms(img, 3, 5) >= 0.0)

    def test_even_filter_rejected(self):
        with pytest.raises(ParameterError):
            patch_norms(np.ones((4, 4, 1)), 2, 1)


class TestCntkTraceInvariants:
    @pytest.fixture(scope="class")
    def random_pair(self):
        rng = np.random.default_rng(1)
        y = rng.standard_normal((4, 4, 2))
        z = rng.standard_normal((4, 4, 2))
        return y, z

    def test_gamma_diagonal_equals_patch_energy(self, random_pair):
        y, _ = random_pair
        q = 3
        tr = cntk_trace(y, y, q, 3)
        for h in range(4):
            diag = np.einsum("ijij->ij", tr.gamma[h])
            assert np.allclose(diag, tr.norms_left[h] / q**2, atol=1e-12)

    def test_gamma_dot_diagonal_is_inverse_filter_area(self, random_pair):
        y, _ = random_pair
        q = 3
        tr = cntk_trace(y, y, q, 3)
        for h in range(1, 4):
            diag = np.einsum("ijij->ij", tr.gamma_dot[h])
            assert np.allclose(diag, 1.0 / q**2, atol=1e-12)

    def test_cauchy_schwarz_bound(self, random_pair):
        y, z = random_pair
        q = 3
        tr = cntk_trace(y, z, q, 3)
        for h in range(4):
            bound = np.sqrt(
                np.multiply.outer(tr.norms_left[h], tr.norms_right[h])
            ) / q**2
            assert np.all(np.abs(tr.gamma[h]) <= bound + 1e-12)

    def test_pi_diagonal_identity(self, random_pair):
        y, _ = random_pair
        q, depth = 3, 3
        tr = cntk_trace(y, y, q, depth)
        norms = patch_norms(y, q, depth + 1)
        for h in range(depth):
            diag = np.einsum("ijij->ij", tr.pi[h])
            assert np.allclose(diag, h * norms[h + 1], atol=1e-10)
        top = np.einsum("ijij->ij", tr.pi[depth])
        assert np.allclose(top, (depth - 1) * norms[depth] / q**2, atol=1e-10)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(DimensionError):
            cntk_trace(np.ones((4, 4, 1)), np.ones((4, 5, 1)), 3, 2)


class TestThetaCntk:
    def test_depth_one_is_identically_zero(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal((5, 5, 2))
        z = rng.standard_normal((5, 5, 2))
        assert theta_cntk(y, z, 3, 1) == 0.0

    def test_scalar_image_hand_value(self):
        # single pixel, single channel, q=1, depth 2: kernel value is 6
        y = np.full((1, 1, 1), 2.0)
        z = np.full((1, 1, 1), 3.0)
        assert theta_cntk(y, z, 1, 2) == pytest.approx(6.0, abs=1e-12)

    def test_self_kernel_diagonal_consistency(self):
        rng = np.random.default_rng(3)
        y = rng.standard_normal((4, 4, 1))
        q, depth = 3, 3
        tr = cntk_trace(y, y, q, depth)
        diag = np.einsum("ijij->ij", tr.pi[depth])
        norms = patch_norms(y, q, depth)
        assert np.allclose(diag, (depth - 1) * norms[depth] / q**2, atol=1e-10)
        value = theta_cntk(y, y, q, depth)
        assert value == pytest.approx(tr.pi[depth].sum() / 4**4, rel=1e-12)

    def test_lower_bound(self):
        rng = np.random.default_rng(4)
        y = rng.standard_normal((6, 6, 2))
        z = rng.standard_normal((6, 6, 2))
        for depth in (2, 3):
            q = 3
            ny = patch_norms(y, q, depth)[depth]
            nz = patch_norms(z, q, depth)[depth]
            total = np.sqrt(np.multiply.outer(ny, nz)).sum()
            bound = (depth - 1) / (9 * q**2 * 36.0**2) * total
            assert theta_cntk(y, z, q, depth) >= bound - 1e-12

    def test_positive_scaling(self):
        rng = np.random.default_rng(5)
        y = rng.standard_normal((4, 5, 2))
        z = rng.standard_normal((4, 5, 2))
        base = theta_cntk(y, z, 3, 2)
        assert theta_cntk(3.0 * y, z, 3, 2) == pytest.approx(3.0 * base, rel=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        y = rng.standard_normal((4, 4, 2))
        z = rng.standard_normal((4, 4, 2))
        assert theta_cntk(y, z, 3, 3) == pytest.approx(theta_cntk(z, y, 3, 3), rel=1e-12)

    def test_depth_zero_rejected(self):
        with pytest.raises(ParameterError):
            theta_cntk(np.ones((2, 2, 1)), np.ones((2, 2, 1)), 1, 0)
