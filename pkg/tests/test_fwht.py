import numpy as np
import pytest

from ntksketch.errors import DimensionError
from ntksketch.fwht import (
    HAVE_COMPILED_CORE,
    _fwht_rows_numpy,
    fwht,
    fwht_rows_inplace,
    next_power_of_two,
)


def naive_hadamard(n):
    """Sylvester construction, the brute-force oracle."""
    H = np.array([[1.0]])
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


def test_first_basis_vector_gives_ones():
    e1 = np.zeros(4)
    e1[0] = 1.0
    assert np.array_equal(fwht(e1), np.ones(4))


def test_involution_up_to_length():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(8)
    assert np.allclose(fwht(fwht(x)), 8.0 * x, rtol=0, atol=1e-12)


def test_matches_naive_matrix_product():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(8)
    assert np.allclose(fwht(x), naive_hadamard(8) @ x, rtol=1e-13, atol=1e-13)


def test_rows_match_naive_on_batches():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((5, 16))
    expect = a @ naive_hadamard(16).T
    buf = a.copy()
    fwht_rows_inplace(buf)
    assert np.allclose(buf, expect, rtol=1e-12, atol=1e-12)


def test_non_power_of_two_rejected():
    with pytest.raises(DimensionError):
        fwht(np.ones(6))
    with pytest.raises(DimensionError):
        fwht_rows_inplace(np.ones((2, 12)))


def test_shape_validation():
    with pytest.raises(DimensionError):
        fwht(np.ones((2, 4)))
    with pytest.raises(DimensionError):
        fwht_rows_inplace(np.ones(8))


def test_next_power_of_two():
    assert next_power_of_two(1) == 1
    assert next_power_of_two(5) == 8
    assert next_power_of_two(64) == 64
    with pytest.raises(DimensionError):
        next_power_of_two(0)


@pytest.mark.skipif(not HAVE_COMPILED_CORE, reason="compiled core not built")
def test_compiled_and_numpy_paths_bit_identical():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((7, 64)).copy()
    b = a.copy()
    fwht_rows_inplace(a)  # compiled path
    _fwht_rows_numpy(b)
    assert np.array_equal(a, b)
