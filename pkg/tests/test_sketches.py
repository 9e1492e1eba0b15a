import numpy as np
import pytest

from ntksketch.errors import DimensionError, ParameterError
from ntksketch.sketches import OsnapSketch, SrhtSketch, TensorSrhtSketch


class TestSrht:
    def test_zero_maps_to_zero(self):
        sk = SrhtSketch(10, 16, seed=0)
        assert np.array_equal(sk.apply(np.zeros(10)), np.zeros(16))

    def test_linearity(self):
        rng = np.random.default_rng(0)
        sk = SrhtSketch(33, 40, seed=1)
        x = rng.standard_normal(33)
        y = rng.standard_normal(33)
        lhs = sk.apply(2.0 * x + 0.5 * y)
        rhs = 2.0 * sk.apply(x) + 0.5 * sk.apply(y)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_scaling_exact_for_powers_of_two(self):
        rng = np.random.default_rng(1)
        sk = SrhtSketch(17, 12, seed=2)
        x = rng.standard_normal(17)
        assert np.array_equal(sk.apply(2.0 * x), 2.0 * sk.apply(x))

    def test_determinism(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(20)
        a = SrhtSketch(20, 31, seed=7, label="x")
        b = SrhtSketch(20, 31, seed=7, label="x")
        assert np.array_equal(a.sign_flips, b.sign_flips)
        assert np.array_equal(a.sampled_rows, b.sampled_rows)
        assert np.array_equal(a.apply(x), b.apply(x))

    def test_structure_invariants(self):
        sk = SrhtSketch(48, 100, seed=3)
        assert sk.padded_dim == 64
        assert np.all(np.abs(sk.sign_flips) == 1.0)
        assert sk.sampled_rows.min() >= 0
        assert sk.sampled_rows.max() < 64
        assert sk.sampled_rows.shape == (100,)

    def test_batch_rows_match_single(self):
        rng = np.random.default_rng(3)
        sk = SrhtSketch(24, 18, seed=4)
        batch = rng.standard_normal((6, 24))
        out = sk.apply(batch)
        for i in range(6):
            assert np.array_equal(out[i], sk.apply(batch[i]))

    def test_dimension_mismatch(self):
        sk = SrhtSketch(8, 8, seed=0)
        with pytest.raises(DimensionError):
            sk.apply(np.ones(9))

    def test_norm_concentration_monte_carlo(self):
        # 20 fixed unit vectors x 1000 seeds at eps=0.3, d=64, m=512; the
        # empirical failure fraction must stay below 5%.
        rng = np.random.default_rng(5)
        vectors = rng.standard_normal((20, 64))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        failures = 0
        trials = 0
        for vec_id, x in enumerate(vectors):
            for seed in range(1000):
                sk = SrhtSketch(64, 512, seed=seed, label=f"conc{vec_id}")
                err = abs(np.linalg.norm(sk.apply(x)) ** 2 - 1.0)
                failures += err > 0.3
                trials += 1
        assert failures / trials < 0.05


class TestTensorSrht:
    def test_zero_factor_gives_zero(self):
        sk = TensorSrhtSketch((6, 6), 12, seed=0)
        rng = np.random.default_rng(0)
        y = rng.standard_normal(6)
        assert np.array_equal(sk.apply(np.zeros(6), y), np.zeros(12))
        assert np.array_equal(sk.apply(y, np.zeros(6)), np.zeros(12))

    def test_bilinearity(self):
        rng = np.random.default_rng(1)
        sk = TensorSrhtSketch((5, 7), 16, seed=1)
        x1, x2 = rng.standard_normal((2, 5))
        y = rng.standard_normal(7)
        lhs = sk.apply(3.0 * x1 - x2, y)
        rhs = 3.0 * sk.apply(x1, y) - sk.apply(x2, y)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_unit_tensor_norm_mean(self):
        # mean over 2000 seeds of ||T(e1 (x) e1)||^2 -> 1 within 3 SE
        e1 = np.zeros(4)
        e1[0] = 1.0
        vals = np.empty(2000)
        for seed in range(2000):
            sk = TensorSrhtSketch((4, 4), 16, seed=seed)
            out = sk.apply(e1, e1)
            vals[seed] = out @ out
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - 1.0) <= 3 * se + 1e-12

    def test_inner_product_unbiased_against_tensor_oracle(self):
        rng = np.random.default_rng(2)
        x, y, z, w = rng.standard_normal((4, 4))
        exact = np.dot(np.kron(x, y), np.kron(z, w))  # 16-dim brute force
        vals = np.empty(2000)
        for seed in range(2000):
            sk = TensorSrhtSketch((4, 4), 16, seed=seed)
            vals[seed] = sk.apply(x, y) @ sk.apply(z, w)
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - exact) <= 3 * se

    def test_broadcasting_single_row(self):
        rng = np.random.default_rng(3)
        sk = TensorSrhtSketch((5, 5), 9, seed=4)
        batch = rng.standard_normal((4, 5))
        single = rng.standard_normal(5)
        out = sk.apply(batch, single.reshape(1, -1))
        for i in range(4):
            assert np.array_equal(out[i], sk.apply(batch[i], single))

    def test_dimension_checks(self):
        sk = TensorSrhtSketch((3, 4), 8, seed=0)
        with pytest.raises(DimensionError):
            sk.apply(np.ones(4), np.ones(4))
        with pytest.raises(DimensionError):
            sk.apply(np.ones((2, 3)), np.ones((3, 4)))


class TestOsnap:
    def test_zero_maps_to_zero(self):
        sk = OsnapSketch(16, 32, seed=0)
        assert np.array_equal(sk.apply(np.zeros(16)), np.zeros(32))

    def test_basis_vector_structure(self):
        sk = OsnapSketch(32, 64, seed=1, sparsity=8)
        for j in (0, 13, 31):
            e = np.zeros(32)
            e[j] = 1.0
            out = sk.apply(e)
            nz = np.flatnonzero(out)
            assert nz.size == 8
            assert np.allclose(np.abs(out[nz]), 1.0 / np.sqrt(8), rtol=0, atol=0)

    def test_every_column_has_exact_sparsity(self):
        sk = OsnapSketch(50, 40, seed=2, sparsity=5)
        for j in range(50):
            rows = sk.rows[:, j]
            assert np.unique(rows).size == 5
        assert np.all(np.abs(sk.signs) == 1.0)

    def test_linearity(self):
        rng = np.random.default_rng(4)
        sk = OsnapSketch(30, 25, seed=3)
        x, y = rng.standard_normal((2, 30))
        lhs = sk.apply(x - 4.0 * y)
        rhs = sk.apply(x) - 4.0 * sk.apply(y)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_inner_product_unbiased(self):
        rng = np.random.default_rng(5)
        x, z = rng.standard_normal((2, 32))
        exact = x @ z
        vals = np.empty(2000)
        for seed in range(2000):
            sk = OsnapSketch(32, 64, seed=seed)
            vals[seed] = sk.apply(x) @ sk.apply(z)
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - exact) <= 3 * se

    def test_batch_rows_match_single(self):
        rng = np.random.default_rng(6)
        sk = OsnapSketch(12, 20, seed=4)
        batch = rng.standard_normal((5, 12))
        out = sk.apply_batch(batch)
        for i in range(5):
            assert np.array_equal(out[i], sk.apply(batch[i]))

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            OsnapSketch(8, 4, seed=0, sparsity=5)
        with pytest.raises(ParameterError):
            OsnapSketch(0, 4, seed=0)
        with pytest.raises(DimensionError):
            OsnapSketch(8, 4, seed=0, sparsity=2).apply(np.ones(7))
