"""Exact dynamic program for the deep convolutional ReLU tangent kernel
with global average pooling.

Quadratic in the pixel count by construction, so it only runs at desk scale;
it exists as the ground truth for the convolutional feature map.  Window
sums use zero padding at the image boundary, and wherever a patch-energy
normalizer vanishes the normalized argument is taken to be 0 (the continuous
limit of the formula as the patch energy goes to 0).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .ntk import kappa0, kappa1


def _check_image(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise DimensionError(f"image tensor must be 3-d (d1, d2, c), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("image tensor contains non-finite entries")
    return arr


def _check_filter(q: int):
    if q < 1 or q % 2 == 0:
        raise ParameterError(f"filter size must be odd and positive, got {q}")


def _window_sum_2d(t: np.ndarray, q: int) -> np.ndarray:
    """Sum of t over the q x q window around each pixel, zero padded."""
    d1, d2 = t.shape
    r = (q - 1) // 2
    out = np.zeros_like(t)
    for a in range(-r, r + 1):
        il, ih = max(0, -a), min(d1, d1 - a)
        if il >= ih:
            continue
        for b in range(-r, r + 1):
            jl, jh = max(0, -b), min(d2, d2 - b)
            if jl >= jh:
                continue
            out[il:ih, jl:jh] += t[il + a : ih + a, jl + b : jh + b]
    return out


def _window_sum_4d(t: np.ndarray, q: int) -> np.ndarray:
    """Diagonal window sum: out[i,j,i',j'] = sum_{a,b} t[i+a,j+b,i'+a,j'+b]."""
    d1, d2 = t.shape[0], t.shape[1]
    r = (q - 1) // 2
    out = np.zeros_like(t)
    for a in range(-r, r + 1):
        il, ih = max(0, -a), min(d1, d1 - a)
        if il >= ih:
            continue
        for b in range(-r, r + 1):
            jl, jh = max(0, -b), min(d2, d2 - b)
            if jl >= jh:
                continue
            out[il:ih, jl:jh, il:ih, jl:jh] += t[
                il + a : ih + a, jl + b : jh + b, il + a : ih + a, jl + b : jh + b
            ]
    return out


def patch_norms(x, q: int, depth: int) -> np.ndarray:
    """Per-layer patch energies N[h], shape (depth+1, d1, d2).

    N[0] = q^2 * sum_l x[...,l]^2 and each next layer averages the previous
    one over the q x q window (zero padded) with weight 1/q^2.
    """
    arr = _check_image(x)
    _check_filter(q)
    if depth < 0:
        raise ParameterError(f"depth must be >= 0, got {depth}")
    d1, d2, _ = arr.shape
    norms = np.empty((depth + 1, d1, d2))
    norms[0] = q * q * np.sum(arr * arr, axis=2)
    for h in range(1, depth + 1):
        norms[h] = _window_sum_2d(norms[h - 1], q) / (q * q)
    return norms


@dataclass
class CntkTrace:
    """All intermediate tensors of the exact convolutional DP.

    gamma[h] and pi[h] are (d1, d2, d1, d2) covariance tensors; gamma_dot[0]
    is None since the derivative covariance starts at layer 1.
    """

    depth: int
    filter_size: int
    norms_left: np.ndarray
    norms_right: np.ndarray
    gamma: list = field(default_factory=list)
    gamma_dot: list = field(default_factory=list)
    pi: list = field(default_factory=list)


def cntk_trace(y, z, q: int, depth: int) -> CntkTrace:
    """Run the exact DP for an image pair and keep every layer's tensors."""
    ya = _check_image(y)
    za = _check_image(z)
    if ya.shape != za.shape:
        raise DimensionError(f"image shapes differ: {ya.shape} vs {za.shape}")
    _check_filter(q)
    if depth < 1:
        raise ParameterError(f"depth must be >= 1, got {depth}")

    ny = patch_norms(ya, q, depth)
    nz = patch_norms(za, q, depth)
    trace = CntkTrace(depth=depth, filter_size=q, norms_left=ny, norms_right=nz)

    gamma = np.einsum("ijl,uvl->ijuv", ya, za)
    trace.gamma.append(gamma)
    trace.gamma_dot.append(None)
    d1, d2 = ya.shape[0], ya.shape[1]
    pi = np.zeros((d1, d2, d1, d2))
    trace.pi.append(pi)

    qsq = q * q
    for h in range(1, depth + 1):
        denom = np.sqrt(np.multiply.outer(ny[h], nz[h]))
        wsum = _window_sum_4d(gamma, q)
        with np.errstate(divide="ignore", invalid="ignore"):
            arg = np.where(denom > 0.0, wsum / np.where(denom > 0.0, denom, 1.0), 0.0)
        arg = np.clip(arg, -1.0, 1.0)
        gamma = denom / qsq * kappa1(arg)
        gamma_dot = kappa0(arg) / qsq
        trace.gamma.append(gamma)
        trace.gamma_dot.append(gamma_dot)
        if h < depth:
            pi = _window_sum_4d(pi * gamma_dot + gamma, q)
        else:
            pi = pi * gamma_dot
        trace.pi.append(pi)
    return trace


def theta_cntk(y, z, q: int, depth: int) -> float:
    """Exact convolutional tangent kernel with global average pooling."""
    trace = cntk_trace(y, z, q, depth)
    d1, d2 = trace.norms_left.shape[1], trace.norms_left.shape[2]
    return float(trace.pi[depth].sum() / (d1 * d1 * d2 * d2))
