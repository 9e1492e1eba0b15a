"""Truncated power series for the arc-cosine kernels, degree selection
rules, and the nonnegative polynomial fit to the deep ReLU kernel used by
the fast feature-map path."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import nnls

from .errors import ParameterError
from .ntk import k_relu_grid, kappa0, kappa1

_TARGETS = {"kappa1": kappa1, "kappa0": kappa0}


@dataclass
class KernelPolynomial:
    """Polynomial with nonnegative coefficients, lowest degree first.

    Nonnegativity is required because the sketching pipelines scale blocks
    by sqrt(coefficient).
    """

    coefficients: np.ndarray
    target: str

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ParameterError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(coeffs)):
            raise ParameterError("coefficients must be finite")
        if np.any(coeffs < 0.0):
            raise ParameterError("coefficients must be nonnegative")
        self.coefficients = coeffs

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, alpha):
        return np.polynomial.polynomial.polyval(alpha, self.coefficients)


def _central_binomial_ratios(count: int) -> np.ndarray:
    """t_i = (2i)! / (2^(2i) (i!)^2) for i = 0..count-1, by stable recurrence."""
    t = np.empty(count)
    t[0] = 1.0
    for i in range(1, count):
        t[i] = t[i - 1] * (2 * i - 1) / (2 * i)
    return t


def taylor_coeffs_kappa1(p: int) -> KernelPolynomial:
    """Degree-(2p+2) truncated series of kappa1.

    c0 = 1/pi, c1 = 1/2 and c_{2i+2} = t_i / (pi (2i+1)(2i+2)) for i <= p;
    odd coefficients beyond c1 vanish.
    """
    if p < 0:
        raise ParameterError(f"truncation order must be >= 0, got {p}")
    coeffs = np.zeros(2 * p + 3)
    coeffs[0] = 1.0 / math.pi
    coeffs[1] = 0.5
    t = _central_binomial_ratios(p + 1)
    for i in range(p + 1):
        coeffs[2 * i + 2] = t[i] / (math.pi * (2 * i + 1) * (2 * i + 2))
    return KernelPolynomial(coeffs, target="kappa1-taylor")


def taylor_coeffs_kappa0(p_prime: int) -> KernelPolynomial:
    """Degree-(2p'+1) truncated series of kappa0.

    b0 = 1/2 and b_{2i+1} = t_i / (pi (2i+1)) for i <= p'; even coefficients
    beyond b0 vanish.
    """
    if p_prime < 0:
        raise ParameterError(f"truncation order must be >= 0, got {p_prime}")
    coeffs = np.zeros(2 * p_prime + 2)
    coeffs[0] = 0.5
    t = _central_binomial_ratios(p_prime + 1)
    for i in range(p_prime + 1):
        coeffs[2 * i + 1] = t[i] / (math.pi * (2 * i + 1))
    return KernelPolynomial(coeffs, target="kappa0-taylor")


class DegreeChoice(NamedTuple):
    p: int
    p_prime: int
    kappa1_sup_error: float
    kappa0_sup_error: float


def choose_degrees(depth: int, eps: float) -> DegreeChoice:
    """Truncation orders p = ceil(2 L^2 / eps^(4/3)), p' = ceil(9 L^2 / eps^2).

    Also reports the guaranteed uniform errors these orders imply for the
    truncated series: any p >= 1/(9 e^(2/3)) approximates kappa1 within e,
    and any p' >= 1/(26 e^2) approximates kappa0 within e; inverting gives
    (9p)^(-3/2) and (26p')^(-1/2).
    """
    if depth < 1:
        raise ParameterError(f"depth must be >= 1, got {depth}")
    if not 0.0 < eps <= 1.0:
        raise ParameterError(f"eps must be in (0, 1], got {eps}")
    p = math.ceil(2.0 * depth * depth / eps ** (4.0 / 3.0))
    p_prime = math.ceil(9.0 * depth * depth / (eps * eps))
    return DegreeChoice(
        p=p,
        p_prime=p_prime,
        kappa1_sup_error=(9.0 * p) ** -1.5,
        kappa0_sup_error=(26.0 * p_prime) ** -0.5,
    )


def sup_error(poly: KernelPolynomial, target: str, grid_size: int = 10_000) -> float:
    """Max |poly - target| on a uniform grid over [-1, 1]."""
    if target not in _TARGETS:
        raise ParameterError(f"unknown target {target!r}; use one of {sorted(_TARGETS)}")
    grid = np.linspace(-1.0, 1.0, grid_size)
    return float(np.max(np.abs(poly(grid) - _TARGETS[target](grid))))


def fit_ntk_polynomial(
    depth: int, degree: int, grid_size: int = 2001
) -> tuple[KernelPolynomial, float]:
    """Nonnegative least-squares fit to the normalized depth-L ReLU kernel.

    Fits k_relu(depth, .) / (depth + 1) on a Chebyshev-spaced grid over
    [-1, 1] with coefficients constrained to be >= 0 (active-set solver), so
    the result can drive the sqrt-coefficient sketch pipeline.  Returns the
    fit and its sup residual on the grid.
    """
    if degree < 1:
        raise ParameterError(f"fit degree must be >= 1, got {degree}")
    if depth < 0:
        raise ParameterError(f"depth must be >= 0, got {depth}")
    if grid_size < degree + 1:
        raise ParameterError("grid must have more points than coefficients")
    nodes = np.cos(np.pi * (np.arange(grid_size) + 0.5) / grid_size)
    nodes = np.sort(nodes)
    target = k_relu_grid(depth, nodes) / (depth + 1)
    vander = np.polynomial.polynomial.polyvander(nodes, degree)
    coeffs, _ = nnls(vander, target)
    poly = KernelPolynomial(coeffs, target=f"fitted-ntk({depth})")
    residual = float(np.max(np.abs(poly(nodes) - target)))
    return poly, residual
