"""Configuration shared by the fully connected and convolutional feature
maps: accuracy targets, polynomial degrees and every intermediate sketch
dimension.

The kernel theory only fixes dimension orders; the defaults below evaluate
those orders with constant 1 at the configured (eps, delta, depth), and all
seven dimensions can be overridden individually (tests and the CLI tune them
empirically).  When the Taylor truncation orders implied by eps exceed
``degree_cap`` and were not overridden, the pipeline falls back to the
fitted-polynomial mode, which stays cheap for deep networks.
"""

import json
import math
from dataclasses import dataclass, field, replace

from .errors import ParameterError
from .polyfit import choose_degrees

DIM_KEYS = ("s", "n", "n1", "r", "m", "m2", "s_star")

DEFAULT_FITTED_DEGREE = 8
DEFAULT_DEGREE_CAP = 32


def theory_dims(depth: int, eps: float, delta: float, pixels: int = 1) -> dict:
    """Dimension orders evaluated with constant 1.

    ``pixels`` enters the log terms for image inputs, where the failure
    probability is shared across all pixel pairs.
    """
    log_t = max(1.0, math.log(pixels * depth / (eps * delta)))
    log_d = max(1.0, math.log(1.0 / delta))
    L = depth
    return {
        "s": math.ceil(L**2 / eps**2 * log_t**2),
        "n": math.ceil(L**6 / eps**4 * log_t**3),
        "n1": math.ceil(L**4 / eps**4 * log_t**3),
        "r": math.ceil(L**6 / eps**4 * log_t**2),
        "m": math.ceil(L**8 / eps ** (16.0 / 3.0) * log_t**3),
        "m2": math.ceil(L**2 / eps**2 * log_t**3),
        "s_star": math.ceil(1.0 / eps**2 * log_d),
    }


@dataclass
class SketchConfig:
    """Frozen recipe for one feature map.

    mode is "taylor" (per-layer arc-cosine series of orders p, p') or
    "fitted" (single polynomial of ``fitted_degree`` fit to the whole
    normalized kernel).  Degrees left as None are resolved from (depth, eps)
    on construction.
    """

    eps: float
    delta: float
    depth: int
    dims: dict
    seed: int = 0
    mode: str = "taylor"
    p: int | None = None
    p_prime: int | None = None
    fitted_degree: int = DEFAULT_FITTED_DEGREE
    degree_cap: int = DEFAULT_DEGREE_CAP
    osnap_sparsity: int = 8
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ParameterError(f"eps must be in (0, 1), got {self.eps}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must be in (0, 1), got {self.delta}")
        if self.depth < 0:
            raise ParameterError(f"depth must be >= 0, got {self.depth}")
        if self.mode not in ("taylor", "fitted"):
            raise ParameterError(f"mode must be 'taylor' or 'fitted', got {self.mode!r}")
        missing = [k for k in DIM_KEYS if k not in self.dims]
        if missing:
            raise ParameterError(f"missing dims: {missing}")
        for key in DIM_KEYS:
            value = int(self.dims[key])
            if value < 1:
                raise ParameterError(f"dim {key} must be >= 1, got {self.dims[key]}")
            self.dims[key] = value
        if self.fitted_degree < 1:
            raise ParameterError("fitted_degree must be >= 1")
        if self.mode == "taylor":
            if self.depth < 1:
                raise ParameterError("taylor mode requires depth >= 1")
            self._resolve_taylor_degrees()

    def _resolve_taylor_degrees(self):
        explicit = self.p is not None and self.p_prime is not None
        if explicit:
            if self.p < 0 or self.p_prime < 0:
                raise ParameterError("truncation orders must be >= 0")
            return
        if self.p is None and self.p_prime is None:
            chosen = choose_degrees(self.depth, self.eps)
            if max(chosen.p, chosen.p_prime) > self.degree_cap:
                self.mode = "fitted"
                self.notes.append(
                    f"taylor orders ({chosen.p}, {chosen.p_prime}) exceed cap "
                    f"{self.degree_cap}; using fitted degree {self.fitted_degree}"
                )
            else:
                self.p = chosen.p
                self.p_prime = chosen.p_prime
            return
        raise ParameterError("override both p and p_prime or neither")

    @classmethod
    def from_theory(
        cls, depth: int, eps: float, delta: float, pixels: int = 1, **kwargs
    ) -> "SketchConfig":
        return cls(
            eps=eps,
            delta=delta,
            depth=depth,
            dims=theory_dims(depth, eps, delta, pixels),
            **kwargs,
        )

    def with_seed(self, seed: int) -> "SketchConfig":
        return replace(self, seed=seed, dims=dict(self.dims), notes=list(self.notes))

    def describe(self) -> dict:
        out = {
            "eps": self.eps,
            "delta": self.delta,
            "depth": self.depth,
            "mode": self.mode,
            "dims": dict(self.dims),
            "seed": self.seed,
            "osnap_sparsity": self.osnap_sparsity,
        }
        if self.mode == "taylor":
            out["p"] = self.p
            out["p_prime"] = self.p_prime
        else:
            out["fitted_degree"] = self.fitted_degree
        return out

    def config_hash(self) -> str:
        import hashlib

        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
