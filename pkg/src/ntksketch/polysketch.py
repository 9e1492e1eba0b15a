"""Degree-p tensor-product sketch built as a binary tree.

Leaves reduce the p factor vectors (OSNAP for sparse inputs, pass-through
for dense ones) and every internal node is a TensorSRHT combining its two
children, so a d^p-dimensional tensor product is sketched without ever being
materialized.  Degrees below the padded power of two are filled with e1
factors, which leave every inner product unchanged.
"""

import numpy as np

from .errors import DimensionError, ParameterError
from .fwht import next_power_of_two
from .sketches import OsnapSketch, TensorSrhtSketch


class PolySketchTree:
    """Seeded sketch of degree-p tensor products of vectors in R^d.

    One shared output dimension m is used by every node.  With
    ``use_sparse_leaves`` the leaves are OSNAP instances and application
    costs O(s_col * nnz) per factor; without it the leaves pass the raw
    factors straight into the first TensorSRHT level, which is faster for
    dense inputs.  A degree-1 tree keeps its OSNAP leaf either way, since
    there is no internal node left to do the reducing.
    """

    def __init__(
        self,
        degree: int,
        input_dim: int,
        output_dim: int,
        seed: int,
        use_sparse_leaves: bool = True,
        leaf_sparsity: int = 8,
        label: str = "polysketch",
    ):
        if degree < 1:
            raise ParameterError(f"degree must be >= 1, got {degree}")
        if input_dim < 1 or output_dim < 1:
            raise ParameterError("PolySketch dims must be positive")
        self.degree = degree
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.seed = seed
        self.label = label
        self.use_sparse_leaves = use_sparse_leaves or degree == 1
        self.padded_degree = next_power_of_two(degree)

        if self.use_sparse_leaves:
            self.leaves = [
                OsnapSketch(
                    input_dim,
                    output_dim,
                    seed,
                    sparsity=min(leaf_sparsity, output_dim),
                    label=f"{label}/leaf{i}",
                )
                for i in range(self.padded_degree)
            ]
            child_dim = output_dim
        else:
            self.leaves = [None] * self.padded_degree
            child_dim = input_dim

        # levels[t] holds the TensorSRHT nodes at height t+1; node i combines
        # the outputs 2i and 2i+1 of the level below.
        self.levels = []
        width = self.padded_degree // 2
        t = 0
        while width >= 1:
            dims = (child_dim, child_dim) if t == 0 else (output_dim, output_dim)
            self.levels.append(
                [
                    TensorSrhtSketch(dims, output_dim, seed, label=f"{label}/node{t}_{i}")
                    for i in range(width)
                ]
            )
            width //= 2
            t += 1

        self._e1 = np.zeros(input_dim)
        self._e1[0] = 1.0

    @property
    def num_internal_nodes(self) -> int:
        return self.padded_degree - 1

    def _leaf_out(self, leaf_idx, x):
        leaf = self.leaves[leaf_idx]
        if leaf is None:
            return np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.ndim == 1:
            return leaf.apply(x).reshape(1, -1)
        return leaf.apply_batch(x)

    def _forward(self, leaf_vals):
        """Bottom-up pass; returns per-level output lists (level 0 = leaves)."""
        outs = [leaf_vals]
        for nodes in self.levels:
            below = outs[-1]
            outs.append(
                [node.apply(below[2 * i], below[2 * i + 1]) for i, node in enumerate(nodes)]
            )
        return outs

    def _check_factor(self, v):
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim == 1:
            if arr.shape[0] != self.input_dim:
                raise DimensionError(
                    f"factor has dim {arr.shape[0]}, expected {self.input_dim}"
                )
        elif arr.ndim == 2:
            if arr.shape[1] != self.input_dim:
                raise DimensionError(
                    f"factor has dim {arr.shape[1]}, expected {self.input_dim}"
                )
        else:
            raise DimensionError(f"factor must be 1-d or 2-d, got ndim={arr.ndim}")
        return arr

    def apply_tensor_product(self, factors) -> np.ndarray:
        """Sketch v1 (x) v2 (x) ... (x) v_p for exactly p factor vectors.

        Factors may be vectors or aligned (B, d) batches; slots beyond p are
        padded with e1 internally.
        """
        if len(factors) != self.degree:
            raise DimensionError(
                f"expected {self.degree} factors, got {len(factors)}"
            )
        factors = [self._check_factor(v) for v in factors]
        one_d = all(v.ndim == 1 for v in factors)
        leaf_vals = [
            self._leaf_out(i, factors[i] if i < self.degree else self._e1)
            for i in range(self.padded_degree)
        ]
        root = self._forward(leaf_vals)[-1][0]
        return root[0] if one_d else root

    def apply_tensor_power_prefixes(self, x) -> np.ndarray:
        """Sketches of x^(x)(p-j) (x) e1^(x)j for j = 0..p.

        Entry 0 is computed by one full bottom-up pass; each further entry
        swaps the rightmost remaining x-leaf to e1 and recomputes only that
        leaf's path to the root, reusing every cached sibling.

        Returns an array of shape (p+1, m) for vector input, or
        (p+1, B, m) for a (B, d) batch.
        """
        arr = self._check_factor(x)
        one_d = arr.ndim == 1
        p = self.degree
        leaf_vals = [
            self._leaf_out(i, arr if i < p else self._e1)
            for i in range(self.padded_degree)
        ]
        outs = self._forward(leaf_vals)
        prefixes = [outs[-1][0]]
        for j in range(1, p + 1):
            k = p - j
            outs[0][k] = self._leaf_out(k, self._e1)
            idx = k
            for t, nodes in enumerate(self.levels):
                idx //= 2
                outs[t + 1][idx] = nodes[idx].apply(
                    outs[t][2 * idx], outs[t][2 * idx + 1]
                )
            prefixes.append(outs[-1][0])
        batch = max(v.shape[0] for v in prefixes)
        stacked = np.stack([np.broadcast_to(v, (batch, self.output_dim)) for v in prefixes])
        return stacked[:, 0, :] if one_d else stacked


def polysketch_new(
    degree: int,
    input_dim: int,
    output_dim: int,
    seed: int,
    use_sparse_leaves: bool = True,
    leaf_sparsity: int = 8,
    label: str = "polysketch",
) -> PolySketchTree:
    return PolySketchTree(
        degree,
        input_dim,
        output_dim,
        seed,
        use_sparse_leaves=use_sparse_leaves,
        leaf_sparsity=leaf_sparsity,
        label=label,
    )


def apply_tensor_power_prefixes(tree: PolySketchTree, x) -> np.ndarray:
    return tree.apply_tensor_power_prefixes(x)


def apply_tensor_product(tree: PolySketchTree, factors) -> np.ndarray:
    return tree.apply_tensor_product(factors)
