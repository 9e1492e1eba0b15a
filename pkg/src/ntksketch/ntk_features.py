"""Randomized feature map for the fully connected deep ReLU tangent kernel.

The layer recursion mirrors the exact kernel: per layer, prefix sketches of
tensor powers of the previous features evaluate the truncated arc-cosine
series for the covariance and its derivative, and a degree-2 sketch combines
the running kernel features with the derivative features.  A final Gaussian
projection compresses to the target dimension.  Cost is near-linear in
nnz(x): the input touches the data only through one OSNAP leaf.

The fitted mode replaces the per-layer recursion with a single nonnegative
polynomial fit to the whole normalized kernel, sketched once; it trades a
small systematic fit error for a much cheaper map on deeper networks.
"""

import numpy as np

from .config import SketchConfig
from .errors import DimensionError, ParameterError, ZeroInputError
from .polyfit import fit_ntk_polynomial, taylor_coeffs_kappa0, taylor_coeffs_kappa1
from .polysketch import PolySketchTree
from .rng import component_rng
from .sketches import SrhtSketch


def _sqrt_weighted_concat(weights: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    """Concatenate sqrt(w_l) * block_l along the last axis.

    blocks has shape (count, dim) or (count, B, dim); block l must carry the
    series coefficient l, i.e. blocks[l] sketches the l-fold tensor power.
    """
    scaled = np.sqrt(weights).reshape((-1,) + (1,) * (blocks.ndim - 1)) * blocks
    if blocks.ndim == 2:
        return scaled.reshape(-1)
    return scaled.transpose(1, 0, 2).reshape(blocks.shape[1], -1)


class NtkSketchState:
    """Frozen collection of every random sketch behind one feature map.

    Instances are immutable after construction and transform() is pure, so
    one state can serve many threads; rebuilding with the same (d, config)
    yields bit-identical features.
    """

    def __init__(self, input_dim: int, config: SketchConfig):
        if input_dim < 1:
            raise DimensionError(f"input dim must be >= 1, got {input_dim}")
        self.input_dim = input_dim
        self.config = config
        seed = config.seed
        dims = config.dims
        sp = config.osnap_sparsity

        if config.mode == "taylor":
            self.cov_poly = taylor_coeffs_kappa1(config.p)
            self.deriv_poly = taylor_coeffs_kappa0(config.p_prime)
            self.fit_residual = None
            r, s = dims["r"], dims["s"]
            # degree-1 sketch of the raw input (OSNAP leaf: sparse inputs stay cheap)
            self.input_tree = PolySketchTree(
                1, input_dim, dims["n"], seed, leaf_sparsity=sp, label="ntk/input"
            )
            self.input_srht = SrhtSketch(dims["n"], r, seed, label="ntk/input_srht")
            cov_deg = self.cov_poly.degree
            self.cov_tree = PolySketchTree(
                cov_deg, r, dims["m"], seed, use_sparse_leaves=False, label="ntk/cov_tree"
            )
            self.cov_srht = SrhtSketch(
                (cov_deg + 1) * dims["m"], r, seed, label="ntk/cov_srht"
            )
            deriv_deg = self.deriv_poly.degree
            self.deriv_tree = PolySketchTree(
                deriv_deg, r, dims["n1"], seed, use_sparse_leaves=False,
                label="ntk/deriv_tree",
            )
            self.deriv_srht = SrhtSketch(
                (deriv_deg + 1) * dims["n1"], s, seed, label="ntk/deriv_srht"
            )
            self.pair_tree = PolySketchTree(
                2, s, dims["m2"], seed, use_sparse_leaves=False, label="ntk/pair_tree"
            )
            self.combine_srht = SrhtSketch(
                dims["m2"] + r, s, seed, label="ntk/combine_srht"
            )
            self.init_srht = SrhtSketch(r, s, seed, label="ntk/init_srht")
            gauss_cols = s
        else:
            self.fitted_poly, self.fit_residual = fit_ntk_polynomial(
                config.depth, config.fitted_degree
            )
            deg = self.fitted_poly.degree
            self.fitted_tree = PolySketchTree(
                deg, input_dim, dims["m"], seed, leaf_sparsity=sp, label="ntk/fitted_tree"
            )
            self.fitted_srht = SrhtSketch(
                (deg + 1) * dims["m"], dims["s"], seed, label="ntk/fitted_srht"
            )
            gauss_cols = dims["s"]

        g_rng = component_rng(seed, "ntk/gaussian")
        self.gaussian = g_rng.normal(
            0.0, 1.0 / np.sqrt(dims["s_star"]), size=(dims["s_star"], gauss_cols)
        )

    @property
    def feature_dim(self) -> int:
        return self.gaussian.shape[0]

    def _check_input(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64).ravel()
        if arr.shape[0] != self.input_dim:
            raise DimensionError(
                f"expected input dim {self.input_dim}, got {arr.shape[0]}"
            )
        return arr

    def transform(self, x) -> np.ndarray:
        """Feature vector whose inner products estimate the exact kernel.

        Positively homogeneous under a fixed state: transform(c*x) equals
        c * transform(x) for c > 0.  Raises ZeroInputError on ||x|| = 0.
        """
        arr = self._check_input(x)
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise ZeroInputError("cannot transform the zero vector")
        if self.config.mode == "fitted":
            return self._transform_fitted(arr, norm)
        return norm * (self.gaussian @ self._taylor_layers(arr, norm)["psi"][-1])

    def layer_trace(self, x) -> dict:
        """Per-layer feature vectors (taylor mode), for diagnostics.

        Returns lists "phi" and "psi" indexed by layer 0..depth and
        "phi_dot" indexed 1..depth; inner products of these track the exact
        covariance, kernel and derivative-covariance recursions.
        """
        arr = self._check_input(x)
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise ZeroInputError("cannot transform the zero vector")
        if self.config.mode == "fitted":
            raise ParameterError("layer traces exist in taylor mode only")
        return self._taylor_layers(arr, norm)

    def _taylor_layers(self, arr, norm):
        phi = self.input_srht.apply(self.input_tree.apply_tensor_product([arr])) / norm
        psi = self.init_srht.apply(phi)
        trace = {"phi": [phi], "psi": [psi], "phi_dot": []}
        for _ in range(self.config.depth):
            # prefix j holds j e1-factors, so reversing gives block l = power l
            cov_prefix = self.cov_tree.apply_tensor_power_prefixes(phi)[::-1]
            deriv_prefix = self.deriv_tree.apply_tensor_power_prefixes(phi)[::-1]
            new_phi = self.cov_srht.apply(
                _sqrt_weighted_concat(self.cov_poly.coefficients, cov_prefix)
            )
            phi_dot = self.deriv_srht.apply(
                _sqrt_weighted_concat(self.deriv_poly.coefficients, deriv_prefix)
            )
            pair = self.pair_tree.apply_tensor_product([psi, phi_dot])
            psi = self.combine_srht.apply(np.concatenate([pair, new_phi]))
            phi = new_phi
            trace["phi"].append(phi)
            trace["psi"].append(psi)
            trace["phi_dot"].append(phi_dot)
        return trace

    def _transform_fitted(self, arr, norm):
        unit = arr / norm
        prefix = self.fitted_tree.apply_tensor_power_prefixes(unit)[::-1]
        feats = self.fitted_srht.apply(
            _sqrt_weighted_concat(self.fitted_poly.coefficients, prefix)
        )
        scale = norm * np.sqrt(self.config.depth + 1)
        return scale * (self.gaussian @ feats)


def ntk_sketch_new(input_dim: int, config: SketchConfig) -> NtkSketchState:
    return NtkSketchState(input_dim, config)


def ntk_transform(state: NtkSketchState, x) -> np.ndarray:
    return state.transform(x)
