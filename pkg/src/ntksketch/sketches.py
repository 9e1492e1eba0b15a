"""Base sketches: SRHT, TensorSRHT and OSNAP.

All three are linear (TensorSRHT: bilinear) maps, fully determined by their
dimensions and a (seed, label) pair, and immutable after construction, so a
single instance may be applied concurrently from any number of threads.
"""

import numpy as np

from .errors import DimensionError, ParameterError
from .fwht import fwht_rows_inplace, next_power_of_two
from .rng import component_rng


def _as_batch(x, dim, name):
    """Return (2-d float64 view, was_1d flag) after a shape check."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] != dim:
            raise DimensionError(f"{name}: expected dim {dim}, got {arr.shape[0]}")
        return arr.reshape(1, -1), True
    if arr.ndim == 2:
        if arr.shape[1] != dim:
            raise DimensionError(f"{name}: expected dim {dim}, got {arr.shape[1]}")
        return arr, False
    raise DimensionError(f"{name}: expected 1-d or 2-d input, got ndim={arr.ndim}")


class SrhtSketch:
    """Subsampled randomized Hadamard transform R^d -> R^m.

    Applies sign flips, the Hadamard transform on the zero-padded dimension
    D (the least power of two >= d), then samples m rows uniformly with
    replacement.  The overall scale is chosen so that E||Sx||^2 = ||x||^2.
    """

    def __init__(self, input_dim: int, output_dim: int, seed: int, label: str = "srht"):
        if input_dim < 1 or output_dim < 1:
            raise ParameterError("SRHT dims must be positive")
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.padded_dim = next_power_of_two(input_dim)
        self.seed = seed
        self.label = label
        rng = component_rng(seed, label)
        self.sign_flips = rng.choice(np.array([-1.0, 1.0]), size=self.padded_dim)
        self.sampled_rows = rng.integers(0, self.padded_dim, size=output_dim)
        # sqrt(D/m) on the orthonormal Hadamard == 1/sqrt(m) on the raw one
        self._scale = 1.0 / np.sqrt(output_dim)

    def apply(self, x) -> np.ndarray:
        batch, was_1d = _as_batch(x, self.input_dim, "srht_apply")
        buf = np.zeros((batch.shape[0], self.padded_dim))
        buf[:, : self.input_dim] = batch
        buf[:, : self.input_dim] *= self.sign_flips[: self.input_dim]
        fwht_rows_inplace(buf)
        out = buf[:, self.sampled_rows] * self._scale
        return out[0] if was_1d else out


class TensorSrhtSketch:
    """Sketch of x (x) y applied without materializing the tensor product.

    Entry k is scale * (H S1 x)[i_k] * (H S2 y)[j_k] with independent sign
    diagonals S1, S2 and uniform row pairs (i_k, j_k); the scale makes the
    inner-product estimator unbiased: E<T(x(x)y), T(z(x)w)> = <x,z><y,w>.
    """

    def __init__(self, input_dims, output_dim: int, seed: int, label: str = "tsrht"):
        d1, d2 = input_dims
        if d1 < 1 or d2 < 1 or output_dim < 1:
            raise ParameterError("TensorSRHT dims must be positive")
        self.input_dims = (d1, d2)
        self.output_dim = output_dim
        self.padded_dims = (next_power_of_two(d1), next_power_of_two(d2))
        self.seed = seed
        self.label = label
        rng = component_rng(seed, label)
        pm = np.array([-1.0, 1.0])
        self.sign_flips_left = rng.choice(pm, size=self.padded_dims[0])
        self.sign_flips_right = rng.choice(pm, size=self.padded_dims[1])
        self.row_pairs = np.stack(
            [
                rng.integers(0, self.padded_dims[0], size=output_dim),
                rng.integers(0, self.padded_dims[1], size=output_dim),
            ]
        )
        self._scale = 1.0 / np.sqrt(output_dim)

    def _half(self, x, side):
        dim = self.input_dims[side]
        pad = self.padded_dims[side]
        signs = self.sign_flips_left if side == 0 else self.sign_flips_right
        batch, _ = _as_batch(x, dim, "tensor_srht_apply")
        buf = np.zeros((batch.shape[0], pad))
        buf[:, :dim] = batch
        buf[:, :dim] *= signs[:dim]
        fwht_rows_inplace(buf)
        return buf

    def apply(self, x, y) -> np.ndarray:
        """Sketch x (x) y; batched rows pair up, a 1-row side broadcasts."""
        one_d = np.asarray(x).ndim == 1 and np.asarray(y).ndim == 1
        u = self._half(x, 0)
        v = self._half(y, 1)
        if u.shape[0] != v.shape[0] and 1 not in (u.shape[0], v.shape[0]):
            raise DimensionError(
                f"batch sizes {u.shape[0]} and {v.shape[0]} do not broadcast"
            )
        out = u[:, self.row_pairs[0]] * v[:, self.row_pairs[1]] * self._scale
        return out[0] if one_d else out


class OsnapSketch:
    """Sparse embedding R^d -> R^m with exactly s_col entries per column.

    Column j holds values +-1/sqrt(s_col) in s_col distinct rows, so applying
    the sketch costs O(s_col * nnz(x)) and inner products are unbiased.
    """

    def __init__(
        self,
        input_dim: int,
        output_dim: int,
        seed: int,
        sparsity: int = 8,
        label: str = "osnap",
    ):
        if input_dim < 1 or output_dim < 1:
            raise ParameterError("OSNAP dims must be positive")
        if sparsity < 1 or sparsity > output_dim:
            raise ParameterError(f"sparsity must be in [1, {output_dim}], got {sparsity}")
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.sparsity = sparsity
        self.seed = seed
        self.label = label
        rng = component_rng(seed, label)
        self.rows = self._distinct_rows(rng)
        self.signs = rng.choice(np.array([-1.0, 1.0]), size=(sparsity, input_dim))
        self._scale = 1.0 / np.sqrt(sparsity)

    def _distinct_rows(self, rng) -> np.ndarray:
        # Draw with replacement, then redraw the few columns with collisions;
        # this keeps the draw vectorized for large d.
        rows = rng.integers(0, self.output_dim, size=(self.sparsity, self.input_dim))
        if self.sparsity == 1:
            return rows
        while True:
            srt = np.sort(rows, axis=0)
            bad = np.flatnonzero((srt[1:] == srt[:-1]).any(axis=0))
            if bad.size == 0:
                return rows
            rows[:, bad] = rng.integers(0, self.output_dim, size=(self.sparsity, bad.size))

    def apply(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != self.input_dim:
            raise DimensionError(
                f"osnap_apply: expected a vector of dim {self.input_dim}, "
                f"got shape {arr.shape}"
            )
        idx = np.flatnonzero(arr)
        if idx.size == 0:
            return np.zeros(self.output_dim)
        vals = self.signs[:, idx] * arr[idx]
        out = np.bincount(
            self.rows[:, idx].ravel(), weights=vals.ravel(), minlength=self.output_dim
        )
        return out * self._scale

    def apply_batch(self, x) -> np.ndarray:
        batch, was_1d = _as_batch(x, self.input_dim, "osnap_apply")
        out = np.empty((batch.shape[0], self.output_dim))
        for i in range(batch.shape[0]):
            out[i] = self.apply(batch[i])
        return out[0] if was_1d else out
