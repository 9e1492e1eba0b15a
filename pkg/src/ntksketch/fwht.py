"""Fast Walsh-Hadamard transform with a compiled core and a numpy fallback.

The compiled extension is preferred when importable; set the environment
variable ``NTKSKETCH_PURE_PYTHON=1`` to force the numpy path (used by the
benchmark and by tests that compare the two implementations).  Both paths
perform the identical sequence of butterfly additions, so their outputs are
bit-identical.
"""

import os

import numpy as np

from .errors import DimensionError


def _fwht_rows_numpy(a: np.ndarray) -> None:
    n = a.shape[1]
    h = 1
    while h < n:
        view = a.reshape(a.shape[0], n // (2 * h), 2, h)
        top = view[:, :, 0, :] + view[:, :, 1, :]
        bot = view[:, :, 0, :] - view[:, :, 1, :]
        view[:, :, 0, :] = top
        view[:, :, 1, :] = bot
        h *= 2


_FORCE_PURE = os.environ.get("NTKSKETCH_PURE_PYTHON", "").lower() in {"1", "true", "yes"}

if not _FORCE_PURE:
    try:
        from ._fwht_cy import fwht_rows_f64 as _fwht_rows_impl

        HAVE_COMPILED_CORE = True
    except ImportError:
        _fwht_rows_impl = _fwht_rows_numpy
        HAVE_COMPILED_CORE = False
else:
    _fwht_rows_impl = _fwht_rows_numpy
    HAVE_COMPILED_CORE = False


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    if n < 1:
        raise DimensionError(f"dimension must be positive, got {n}")
    return 1 << (n - 1).bit_length()


def fwht_rows_inplace(a: np.ndarray) -> None:
    """Transform each row of a C-contiguous float64 matrix in place."""
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got ndim={a.ndim}")
    if not is_power_of_two(a.shape[1]):
        raise DimensionError(f"row length {a.shape[1]} is not a power of two")
    _fwht_rows_impl(a)


def fwht(v) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform H @ v of a 1-d sequence.

    Applying twice returns ``len(v) * v``.  Length must be a power of two.
    """
    out = np.array(v, dtype=np.float64, copy=True)
    if out.ndim != 1:
        raise DimensionError(f"expected a 1-d sequence, got ndim={out.ndim}")
    if not is_power_of_two(out.shape[0]):
        raise DimensionError(f"length {out.shape[0]} is not a power of two")
    buf = np.ascontiguousarray(out.reshape(1, -1))
    _fwht_rows_impl(buf)
    return buf[0]
