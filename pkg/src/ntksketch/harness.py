"""End-to-end pipeline: dataset ingestion, batch feature transformation,
zero-mean one-hot label encoding, ridge regression and feature persistence.

Feature files use a small binary format (magic "NTKFEAT1", row count, column
count, element dtype, a provenance JSON blob, then the row-major payload)
that round-trips bit-exactly.  Features are stored in single precision by
default, which matches the sketch noise floor; the ridge solve always runs
in double precision.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DatasetFormatError,
    DimensionError,
    EmptyDatasetError,
    FeatureFormatError,
    ParameterError,
    SolveError,
    ZeroInputError,
)

FEATURE_MAGIC = b"NTKFEAT1"
IMAGE_MAGIC = b"NTKIMGT1"

_DTYPES = {0: np.float32, 1: np.float64}
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}

# Regularizers used by the reference experiments, by task family.
LAMBDA_PRESETS = {
    "ntk-shallow": 0.3,
    "ntk-deep": 0.03,
    "cntk": 0.01,
}


@dataclass
class FeatureMatrix:
    """Transformed dataset plus a record of how it was produced."""

    data: np.ndarray
    provenance: dict

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise DimensionError(f"feature matrix must be 2-d, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("feature matrix contains non-finite entries")
        if not isinstance(self.provenance, dict):
            raise ParameterError("provenance record is required")
        self.data = arr


@dataclass
class RidgeModel:
    weights: np.ndarray
    regularizer: float
    num_classes: int | None = None

    def __post_init__(self):
        if self.regularizer < 0:
            raise ParameterError("regularizer must be >= 0")
        if not np.all(np.isfinite(self.weights)):
            raise SolveError("model weights are non-finite")


# ---------------------------------------------------------------------------
# dataset ingestion
# ---------------------------------------------------------------------------


def _looks_numeric(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _load_csv(path):
    rows = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    start = 0
    if lines and lines[0].strip():
        first = [t for t in lines[0].replace(";", ",").split(",") if t.strip()]
        if first and not all(_looks_numeric(t) for t in first):
            start = 1
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        tokens = [t for t in line.replace(";", ",").split(",") if t.strip()]
        try:
            row = [float(t) for t in tokens]
        except ValueError as exc:
            raise DatasetFormatError(str(exc), line=lineno) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DatasetFormatError(
                f"expected {width} columns, got {len(row)}", line=lineno
            )
        rows.append(row)
    if not rows:
        raise EmptyDatasetError(f"no samples in {path}")
    mat = np.asarray(rows, dtype=np.float64)
    if mat.shape[1] < 2:
        raise DatasetFormatError("need at least one feature column plus labels")
    return mat[:, :-1], mat[:, -1]


def _load_libsvm(path):
    labels = []
    entries = []
    max_index = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError as exc:
                raise DatasetFormatError(f"bad label: {exc}", line=lineno) from None
            row = {}
            for item in parts[1:]:
                try:
                    key, value = item.split(":")
                    idx = int(key)
                    row[idx] = float(value)
                except ValueError as exc:
                    raise DatasetFormatError(f"bad entry {item!r}: {exc}", line=lineno) from None
                if idx < 1:
                    raise DatasetFormatError(f"index must be >= 1, got {idx}", line=lineno)
                max_index = max(max_index, idx)
            entries.append(row)
    if not entries:
        raise EmptyDatasetError(f"no samples in {path}")
    data = np.zeros((len(entries), max_index))
    for i, row in enumerate(entries):
        for idx, value in row.items():
            data[i, idx - 1] = value
    return data, np.asarray(labels)


def save_image_tensors(path, images: np.ndarray):
    """Write a batch of images (n, d1, d2, c) in the raw-tensor format."""
    arr = np.asarray(images, dtype=np.float64)
    if arr.ndim != 4:
        raise DimensionError(f"expected (n, d1, d2, c), got {arr.shape}")
    n, d1, d2, c = arr.shape
    with open(path, "wb") as fh:
        fh.write(IMAGE_MAGIC)
        fh.write(struct.pack("<QQQQB", d1, d2, c, n, 1))
        fh.write(arr.astype("<f8").tobytes())


def _load_image_tensors(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:8] != IMAGE_MAGIC:
        raise DatasetFormatError(f"bad magic in {path}")
    if len(blob) < 8 + 33:
        raise DatasetFormatError("truncated image-tensor header")
    d1, d2, c, n, code = struct.unpack_from("<QQQQB", blob, 8)
    if code not in _DTYPES:
        raise DatasetFormatError(f"unknown dtype code {code}")
    dtype = np.dtype(_DTYPES[code]).newbyteorder("<")
    payload = blob[8 + 33 :]
    expected = n * d1 * d2 * c * dtype.itemsize
    if len(payload) != expected:
        raise DatasetFormatError(
            f"payload has {len(payload)} bytes, expected {expected}"
        )
    if n == 0:
        raise EmptyDatasetError(f"no images in {path}")
    data = np.frombuffer(payload, dtype=dtype).reshape(n, d1, d2, c).astype(np.float64)
    return data, None


def load_dataset(path, fmt: str):
    """Read a dataset; returns (data, labels), labels None for image tensors.

    CSV convention: labels live in the last column; an initial non-numeric
    line is treated as a header.  LibSVM indices are 1-based.
    """
    loaders = {
        "csv": _load_csv,
        "libsvm": _load_libsvm,
        "raw-image-tensor": _load_image_tensors,
    }
    if fmt not in loaders:
        raise ParameterError(f"unknown format {fmt!r}; use one of {sorted(loaders)}")
    return loaders[fmt](path)


# ---------------------------------------------------------------------------
# labels and regression
# ---------------------------------------------------------------------------


def encode_labels(labels, num_classes: int) -> np.ndarray:
    """Zero-mean one-hot rows: class j maps to e_j - (1/t) * ones."""
    arr = np.asarray(labels)
    ints = arr.astype(np.int64)
    if np.any(ints != arr) or np.any(ints < 0) or np.any(ints >= num_classes):
        raise ParameterError(
            f"labels must be integers in [0, {num_classes}), got range "
            f"[{arr.min()}, {arr.max()}]"
        )
    out = np.full((arr.shape[0], num_classes), -1.0 / num_classes)
    out[np.arange(arr.shape[0]), ints] += 1.0
    return out


def batch_transform(state, data, dtype=np.float32) -> FeatureMatrix:
    """Transform every sample with a frozen sketch state.

    Each row goes through the identical code path as a single-sample
    transform, so results are reproducible and independent of batching.
    Per-sample failures are re-raised with the sample index.
    """
    samples = np.asarray(data, dtype=np.float64)
    if samples.ndim < 2:
        raise DimensionError("expected a batch with samples along axis 0")
    count = samples.shape[0]
    out = np.empty((count, state.feature_dim), dtype=np.float64)
    for i in range(count):
        try:
            out[i] = state.transform(samples[i])
        except (ZeroInputError, DimensionError) as exc:
            raise type(exc)(f"sample {i}: {exc}") from None
    provenance = {
        "sketch": type(state).__name__,
        "config_hash": state.config.config_hash(),
        "seed": state.config.seed,
        "config": state.config.describe(),
    }
    return FeatureMatrix(out.astype(dtype), provenance)


def ridge_fit(features, targets, regularizer: float) -> RidgeModel:
    """Solve (Z^T Z + lam I) w = Z^T Y through the compact Gram system.

    Cholesky first; on failure an eigendecomposition of the Gram matrix is
    used instead, except at lam = 0 with a rank-deficient Z, which has no
    unique solution and raises SolveError.
    """
    Z = features.data if isinstance(features, FeatureMatrix) else np.asarray(features)
    Z = Z.astype(np.float64)
    Y = np.asarray(targets, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Z.shape[0] != Y.shape[0]:
        raise DimensionError(
            f"features have {Z.shape[0]} rows but targets have {Y.shape[0]}"
        )
    if regularizer < 0:
        raise ParameterError(f"regularizer must be >= 0, got {regularizer}")
    gram = Z.T @ Z
    gram[np.diag_indices_from(gram)] += regularizer
    rhs = Z.T @ Y
    try:
        chol = np.linalg.cholesky(gram)
        weights = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    except np.linalg.LinAlgError:
        evals, evecs = np.linalg.eigh(gram)
        floor = max(gram.shape[0] * np.abs(evals).max(), 1.0) * np.finfo(np.float64).eps
        if regularizer == 0.0 and np.any(evals < floor):
            raise SolveError(
                "gram matrix is singular at regularizer 0; use a positive value"
            ) from None
        safe = np.where(evals > floor, evals, np.inf)
        weights = evecs @ ((evecs.T @ rhs) / safe[:, None])
    return RidgeModel(weights=weights, regularizer=float(regularizer))


def predict(model: RidgeModel, features) -> np.ndarray:
    Z = features.data if isinstance(features, FeatureMatrix) else np.asarray(features)
    if Z.shape[1] != model.weights.shape[0]:
        raise DimensionError(
            f"features have {Z.shape[1]} columns, model expects {model.weights.shape[0]}"
        )
    return Z.astype(np.float64) @ model.weights


def classify(model: RidgeModel, features) -> np.ndarray:
    return np.argmax(predict(model, features), axis=1)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_features(path, features: FeatureMatrix):
    arr = features.data
    code = _DTYPE_CODES.get(arr.dtype)
    if code is None:
        raise ParameterError(f"unsupported feature dtype {arr.dtype}")
    blob = json.dumps(features.provenance, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<QQB", arr.shape[0], arr.shape[1], code))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes())


def load_features(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:8] != FEATURE_MAGIC:
        raise FeatureFormatError(f"bad magic in {path}")
    offset = 8
    if len(blob) < offset + 17 + 8:
        raise FeatureFormatError("truncated header")
    rows, cols, code = struct.unpack_from("<QQB", blob, offset)
    offset += 17
    (meta_len,) = struct.unpack_from("<Q", blob, offset)
    offset += 8
    if code not in _DTYPES:
        raise FeatureFormatError(f"unknown dtype code {code}")
    if len(blob) < offset + meta_len:
        raise FeatureFormatError("truncated provenance block")
    try:
        provenance = json.loads(blob[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FeatureFormatError(f"bad provenance block: {exc}") from None
    offset += meta_len
    dtype = np.dtype(_DTYPES[code]).newbyteorder("<")
    expected = rows * cols * dtype.itemsize
    payload = blob[offset:]
    if len(payload) != expected:
        raise FeatureFormatError(
            f"payload has {len(payload)} bytes, expected {expected}"
        )
    data = np.frombuffer(payload, dtype=dtype).reshape(rows, cols)
    return FeatureMatrix(np.array(data, dtype=_DTYPES[code]), provenance)


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------


def make_two_arcs(count: int, noise: float = 0.12, seed: int = 0):
    """Interleaved half-circle classes (the usual two-moons layout).

    Returns (data, labels) with a constant bias column appended so that
    dot-product kernels see an affine lift of the plane.
    """
    rng = np.random.default_rng(seed)
    half = count // 2
    t0 = rng.uniform(0.0, np.pi, size=half)
    t1 = rng.uniform(0.0, np.pi, size=count - half)
    pts0 = np.stack([np.cos(t0), np.sin(t0)], axis=1)
    pts1 = np.stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)], axis=1)
    data = np.vstack([pts0, pts1]) + noise * rng.standard_normal((count, 2))
    labels = np.concatenate([np.zeros(half, dtype=int), np.ones(count - half, dtype=int)])
    order = rng.permutation(count)
    data = np.hstack([data[order], np.ones((count, 1))])
    return data, labels[order]
