"""Exact evaluation of the arc-cosine kernels and the deep ReLU tangent
kernel; ground truth for every randomized feature-map test."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, ZeroInputError

ARCCOS_TOL = 1e-9


def _clamped(alpha, tol):
    arr = np.asarray(alpha, dtype=np.float64)
    if np.any(arr < -1.0 - tol) or np.any(arr > 1.0 + tol):
        raise DomainError(
            f"argument outside [-1-{tol}, 1+{tol}]: "
            f"range [{arr.min()}, {arr.max()}]"
        )
    return np.clip(arr, -1.0, 1.0)


def kappa0(alpha, tol: float = ARCCOS_TOL):
    """Zeroth-order arc-cosine kernel (pi - arccos(a)) / pi on [-1, 1]."""
    a = _clamped(alpha, tol)
    out = 1.0 - np.arccos(a) / np.pi
    return out if out.ndim else float(out)


def kappa1(alpha, tol: float = ARCCOS_TOL):
    """First-order arc-cosine kernel; its derivative is kappa0."""
    a = _clamped(alpha, tol)
    out = (np.sqrt(1.0 - a * a) + a * (np.pi - np.arccos(a))) / np.pi
    return out if out.ndim else float(out)


@dataclass
class NtkScalarTrace:
    """Per-layer covariance, derivative-covariance and kernel values.

    ``sigma_dot[0]`` has no preceding layer and is fixed at 1 so that the
    depth-0 kernel equals the depth-0 covariance.
    """

    depth: int
    sigma: np.ndarray
    sigma_dot: np.ndarray
    kernel: np.ndarray


def k_relu_trace(depth: int, alpha) -> NtkScalarTrace:
    """Layer recursion for the univariate deep ReLU kernel.

    sigma[h] is the h-fold kappa1 self-composition of alpha,
    sigma_dot[h] = kappa0(sigma[h-1]) and
    kernel[h] = kernel[h-1] * sigma_dot[h] + sigma[h], with kernel[0] = alpha.
    """
    if depth < 0:
        raise ParameterError(f"depth must be >= 0, got {depth}")
    a = _clamped(alpha, ARCCOS_TOL)
    sigma = np.empty(depth + 1)
    sigma_dot = np.empty(depth + 1)
    kernel = np.empty(depth + 1)
    sigma[0] = a
    sigma_dot[0] = 1.0
    kernel[0] = a
    for h in range(1, depth + 1):
        sigma[h] = kappa1(sigma[h - 1])
        sigma_dot[h] = kappa0(sigma[h - 1])
        kernel[h] = kernel[h - 1] * sigma_dot[h] + sigma[h]
    return NtkScalarTrace(depth=depth, sigma=sigma, sigma_dot=sigma_dot, kernel=kernel)


def k_relu(depth: int, alpha) -> float:
    """Depth-L value of the univariate ReLU kernel at a single point."""
    return float(k_relu_trace(depth, alpha).kernel[depth])


def k_relu_grid(depth: int, alphas: np.ndarray) -> np.ndarray:
    """Vectorized k_relu over a grid of cosine values."""
    a = _clamped(alphas, ARCCOS_TOL)
    sigma = a.copy()
    kernel = a.copy()
    for _ in range(depth):
        sdot = kappa0(sigma)
        sigma = kappa1(sigma)
        kernel = kernel * sdot + sigma
    return kernel


def theta_ntk(depth: int, y, z) -> float:
    """Exact tangent kernel of a depth-L fully connected ReLU network.

    Equals ||y|| ||z|| k_relu(depth, cos(y, z)); the cosine is clamped to
    [-1, 1] before the recursion.
    """
    yv = np.asarray(y, dtype=np.float64).ravel()
    zv = np.asarray(z, dtype=np.float64).ravel()
    ny = np.linalg.norm(yv)
    nz = np.linalg.norm(zv)
    if ny == 0.0 or nz == 0.0:
        raise ZeroInputError("theta_ntk requires nonzero inputs")
    cos = float(np.clip(np.dot(yv, zv) / (ny * nz), -1.0, 1.0))
    return ny * nz * k_relu(depth, cos)
