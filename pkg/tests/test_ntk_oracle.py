import numpy as np
import pytest

from ntksketch.errors import DomainError, ParameterError, ZeroInputError
from ntksketch.ntk import k_relu, k_relu_grid, k_relu_trace, kappa0, kappa1, theta_ntk


class TestArcCosineKernels:
    def test_kappa1_endpoint_values(self):
        assert kappa1(1.0) == pytest.approx(1.0, abs=1e-15)
        assert kappa1(0.0) == pytest.approx(1.0 / np.pi, abs=1e-15)
        assert kappa1(-1.0) == pytest.approx(0.0, abs=1e-15)

    def test_kappa0_endpoint_values(self):
        assert kappa0(1.0) == pytest.approx(1.0, abs=1e-15)
        assert kappa0(0.0) == pytest.approx(0.5, abs=1e-15)
        assert kappa0(-1.0) == pytest.approx(0.0, abs=1e-15)

    def test_monotone_and_bounded_on_grid(self):
        grid = np.linspace(-1.0, 1.0, 10_000)
        for fn in (kappa0, kappa1):
            vals = fn(grid)
            assert np.all(np.diff(vals) >= -1e-12)
            assert vals.min() >= -1e-12
            assert vals.max() <= 1.0 + 1e-12

    def test_kappa0_is_derivative_of_kappa1(self):
        grid = np.linspace(-0.99, 0.99, 2001)
        h = 1e-6
        fd = (kappa1(grid + h) - kappa1(grid - h)) / (2 * h)
        assert np.max(np.abs(fd - kappa0(grid))) < 1e-6

    def test_domain_clamping_and_errors(self):
        assert kappa1(1.0 + 1e-10) == pytest.approx(1.0)
        assert kappa0(-1.0 - 1e-10) == pytest.approx(0.0)
        for fn in (kappa0, kappa1):
            with pytest.raises(DomainError):
                fn(1.1)
            with pytest.raises(DomainError):
                fn(-1.001)


class TestKernelRecursion:
    def test_depth_zero_is_identity(self):
        for alpha in (-1.0, -0.3, 0.0, 0.7, 1.0):
            tr = k_relu_trace(0, alpha)
            assert tr.kernel[0] == alpha
            assert tr.sigma[0] == alpha

    def test_value_at_one_is_depth_plus_one(self):
        for depth in range(33):
            assert k_relu(depth, 1.0) == pytest.approx(depth + 1, abs=1e-12)

    def test_depth_one_at_zero(self):
        assert k_relu(1, 0.0) == pytest.approx(1.0 / np.pi, abs=1e-15)

    def test_trace_invariants(self):
        tr = k_relu_trace(6, -0.42)
        assert tr.sigma.shape == (7,)
        assert np.all(tr.sigma_dot >= 0.0) and np.all(tr.sigma_dot <= 1.0)
        # sigma composition and kernel recursion agree with direct evaluation
        for h in range(1, 7):
            assert tr.sigma[h] == pytest.approx(kappa1(tr.sigma[h - 1]), abs=1e-15)
            assert tr.kernel[h] == pytest.approx(
                tr.kernel[h - 1] * kappa0(tr.sigma[h - 1]) + tr.sigma[h], abs=1e-14
            )

    def test_grid_evaluation_matches_scalar(self):
        grid = np.linspace(-1, 1, 17)
        vals = k_relu_grid(5, grid)
        for a, v in zip(grid, vals):
            assert v == pytest.approx(k_relu(5, a), abs=1e-13)

    def test_lower_bound_for_depth_at_least_two(self):
        grid = np.linspace(-1.0, 1.0, 10_000)
        for depth in (2, 3, 5, 8):
            assert np.all(k_relu_grid(depth, grid) >= (depth + 1) / 9.0)

    def test_negative_depth_rejected(self):
        with pytest.raises(ParameterError):
            k_relu_trace(-1, 0.0)


class TestKneeShape:
    def test_normalized_curves_monotone(self):
        grid = np.linspace(-1.0, 1.0, 4096)
        for depth in (2, 4, 8, 16, 32):
            curve = k_relu_grid(depth, grid) / (depth + 1)
            assert np.all(np.diff(curve) >= -1e-12)
            assert curve[-1] == pytest.approx(1.0, abs=1e-12)

    def test_plateau_level_for_depth_32(self):
        plateau = k_relu(32, 0.0) / 33.0
        assert 0.2 <= plateau <= 0.4

    def test_plateau_stable_across_grid_resolutions(self):
        coarse = k_relu_grid(32, np.linspace(-1, 1, 1001)) / 33.0
        fine = k_relu_grid(32, np.linspace(-1, 1, 10_001)) / 33.0
        assert abs(coarse[500] - fine[5000]) < 1e-12  # alpha = 0 on both grids
        # near-flat plateau: variation over [-1, 0] well below the knee rise
        assert fine[:5000].max() - fine[:5000].min() < 0.05


class TestThetaNtk:
    def test_self_kernel_identity(self):
        rng = np.random.default_rng(0)
        for depth in (1, 2, 5):
            y = rng.standard_normal(9)
            expected = (depth + 1) * float(y @ y)
            assert theta_ntk(depth, y, y) == pytest.approx(expected, rel=1e-12)

    def test_orthogonal_pair_depth_one(self):
        y = np.array([2.0, 0.0, 0.0])
        z = np.array([0.0, 3.0, 0.0])
        assert theta_ntk(1, y, z) == pytest.approx(6.0 / np.pi, rel=1e-12)

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(1)
        y, z = rng.standard_normal((2, 7))
        base = theta_ntk(3, y, z)
        assert theta_ntk(3, 2.5 * y, z) == pytest.approx(2.5 * base, rel=1e-12)
        assert theta_ntk(3, y, 0.5 * z) == pytest.approx(0.5 * base, rel=1e-12)

    def test_zero_input_rejected(self):
        with pytest.raises(ZeroInputError):
            theta_ntk(2, np.zeros(4), np.ones(4))
        with pytest.raises(ZeroInputError):
            theta_ntk(2, np.ones(4), np.zeros(4))
