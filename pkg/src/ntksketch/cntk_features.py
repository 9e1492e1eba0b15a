"""Randomized feature map for the convolutional deep ReLU tangent kernel
with global average pooling.

Each pixel carries its own feature vectors, but every pixel shares the same
sketch instances (weight sharing), so all per-pixel work is batched: one
tree application transforms the whole (pixels, dim) matrix at once.  Patches
are assembled by direct sums of neighboring pixel features in row-major
(a, b) order with zero padding at the boundary, matching the exact DP, and
per-image cost is linear in the pixel count.
"""

import math

import numpy as np

from .cntk import patch_norms
from .config import SketchConfig
from .errors import DimensionError, ParameterError
from .ntk_features import _sqrt_weighted_concat
from .polyfit import taylor_coeffs_kappa0, taylor_coeffs_kappa1
from .polysketch import PolySketchTree
from .rng import component_rng
from .sketches import SrhtSketch


def _patch_index_map(d1: int, d2: int, q: int) -> np.ndarray:
    """(pixels, q^2) neighbor ids in row-major (a, b) order; -1 = out of range."""
    r = (q - 1) // 2
    ii, jj = np.meshgrid(np.arange(d1), np.arange(d2), indexing="ij")
    maps = []
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            ni, nj = ii + a, jj + b
            valid = (ni >= 0) & (ni < d1) & (nj >= 0) & (nj < d2)
            maps.append(np.where(valid, ni * d2 + nj, -1).ravel())
    return np.stack(maps, axis=1)


def _gather_patches(rows: np.ndarray, nbr: np.ndarray) -> np.ndarray:
    """Direct sum of per-pixel rows over each patch: (P, dim) -> (P, q^2*dim)."""
    padded = np.vstack([rows, np.zeros((1, rows.shape[1]))])
    return padded[nbr].reshape(rows.shape[0], -1)


# Pixels are pushed through the per-pixel map stages in blocks of this many
# rows.  Every stage is independent per row, so blocking changes nothing in
# the output; it only bounds the working set, keeping the per-pixel cost flat
# from thumbnail to full-size images.
_PIXEL_CHUNK = 128


def _chunks(total: int, size: int = _PIXEL_CHUNK):
    for lo in range(0, total, size):
        yield slice(lo, min(total, lo + size))


class CntkSketchState:
    """Frozen sketches for one convolutional feature map.

    The depth must be >= 2 for the approximation guarantee (depth 1 collapses
    to the zero map, exactly like the exact kernel).
    """

    def __init__(self, d1: int, d2: int, channels: int, q: int, config: SketchConfig):
        if d1 < 1 or d2 < 1 or channels < 1:
            raise DimensionError("image dims must be positive")
        if q < 1 or q % 2 == 0:
            raise ParameterError(f"filter size must be odd and positive, got {q}")
        if config.mode != "taylor":
            raise ParameterError("the convolutional map supports taylor mode only")
        self.image_shape = (d1, d2, channels)
        self.filter_size = q
        self.config = config
        seed = config.seed
        dims = config.dims
        r, s = dims["r"], dims["s"]

        self.cov_poly = taylor_coeffs_kappa1(config.p)
        self.deriv_poly = taylor_coeffs_kappa0(config.p_prime)

        self.input_srht = SrhtSketch(channels, r, seed, label="cntk/input_srht")
        cov_deg = self.cov_poly.degree
        self.cov_tree = PolySketchTree(
            cov_deg, q * q * r, dims["m"], seed, use_sparse_leaves=False,
            label="cntk/cov_tree",
        )
        self.cov_srht = SrhtSketch(
            (cov_deg + 1) * dims["m"], r, seed, label="cntk/cov_srht"
        )
        deriv_deg = self.deriv_poly.degree
        self.deriv_tree = PolySketchTree(
            deriv_deg, q * q * r, dims["n"], seed, use_sparse_leaves=False,
            label="cntk/deriv_tree",
        )
        self.deriv_srht = SrhtSketch(
            (deriv_deg + 1) * dims["n"], s, seed, label="cntk/deriv_srht"
        )
        self.pair_tree = PolySketchTree(
            2, s, dims["m2"], seed, use_sparse_leaves=False, label="cntk/pair_tree"
        )
        self.combine_srht = SrhtSketch(
            q * q * (dims["m2"] + r), s, seed, label="cntk/combine_srht"
        )
        g_rng = component_rng(seed, "cntk/gaussian")
        self.gaussian = g_rng.normal(
            0.0, 1.0 / np.sqrt(dims["s_star"]), size=(dims["s_star"], dims["m2"])
        )
        self._nbr = _patch_index_map(d1, d2, q)

    @property
    def feature_dim(self) -> int:
        return self.gaussian.shape[0]

    def _check_image(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.shape != self.image_shape:
            raise DimensionError(
                f"expected image shape {self.image_shape}, got {arr.shape}"
            )
        return arr

    def patch_norms(self, x) -> np.ndarray:
        """Per-layer patch energies, exactly as the exact DP computes them."""
        return patch_norms(
            self._check_image(x), self.filter_size, self.config.depth
        )

    def transform(self, x) -> np.ndarray:
        """Feature vector for one image; inner products estimate the kernel."""
        arr = self._check_image(x)
        d1, d2, c = self.image_shape
        pixels = d1 * d2
        q = self.filter_size
        depth = self.config.depth
        norms = self.patch_norms(arr).reshape(depth + 1, pixels)

        phi = self.input_srht.apply(arr.reshape(pixels, c))
        psi = np.zeros((pixels, self.combine_srht.output_dim))
        psi_top = None
        for h in range(1, depth + 1):
            level = norms[h]
            inv = np.where(level > 0.0, 1.0 / np.sqrt(np.where(level > 0.0, level, 1.0)), 0.0)
            mu = _gather_patches(phi, self._nbr) * inv[:, None]
            phi_scale = np.sqrt(level) / q
            new_phi = np.empty((pixels, self.cov_srht.output_dim))
            pair = np.empty((pixels, self.pair_tree.output_dim))
            for sl in _chunks(pixels):
                cov_prefix = self.cov_tree.apply_tensor_power_prefixes(mu[sl])[::-1]
                new_phi[sl] = self.cov_srht.apply(
                    _sqrt_weighted_concat(self.cov_poly.coefficients, cov_prefix)
                ) * phi_scale[sl, None]
                deriv_prefix = self.deriv_tree.apply_tensor_power_prefixes(mu[sl])[::-1]
                phi_dot = (1.0 / q) * self.deriv_srht.apply(
                    _sqrt_weighted_concat(self.deriv_poly.coefficients, deriv_prefix)
                )
                pair[sl] = self.pair_tree.apply_tensor_product([psi[sl], phi_dot])
            if h < depth:
                eta = np.hstack([pair, new_phi])
                gathered = _gather_patches(eta, self._nbr)
                psi = np.empty((pixels, self.combine_srht.output_dim))
                for sl in _chunks(pixels):
                    psi[sl] = self.combine_srht.apply(gathered[sl])
            else:
                psi_top = pair
            phi = new_phi
        pooled = psi_top.sum(axis=0) / pixels
        return self.gaussian @ pooled


def cntk_sketch_new(
    d1: int, d2: int, channels: int, q: int, config: SketchConfig
) -> CntkSketchState:
    return CntkSketchState(d1, d2, channels, q, config)


def cntk_transform(state: CntkSketchState, x) -> np.ndarray:
    return state.transform(x)


def cntk_patch_norms(state: CntkSketchState, x) -> np.ndarray:
    return state.patch_norms(x)
