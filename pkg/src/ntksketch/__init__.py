"""Randomized low-dimensional feature maps whose inner products approximate
the tangent kernels of infinitely wide fully connected and convolutional
ReLU networks, with exact-kernel oracles and a ridge-regression harness."""

from .config import SketchConfig, theory_dims
from .cntk import CntkTrace, cntk_trace, patch_norms, theta_cntk
from .cntk_features import (
    CntkSketchState,
    cntk_patch_norms,
    cntk_sketch_new,
    cntk_transform,
)
from .errors import (
    DatasetFormatError,
    DimensionError,
    DomainError,
    EmptyDatasetError,
    FeatureFormatError,
    ParameterError,
    SolveError,
    ZeroInputError,
)
from .fwht import HAVE_COMPILED_CORE, fwht
from .harness import (
    FeatureMatrix,
    LAMBDA_PRESETS,
    RidgeModel,
    batch_transform,
    classify,
    encode_labels,
    load_dataset,
    load_features,
    make_two_arcs,
    predict,
    ridge_fit,
    save_features,
    save_image_tensors,
)
from .ntk import NtkScalarTrace, k_relu, k_relu_grid, k_relu_trace, kappa0, kappa1, theta_ntk
from .ntk_features import NtkSketchState, ntk_sketch_new, ntk_transform
from .polyfit import (
    KernelPolynomial,
    choose_degrees,
    fit_ntk_polynomial,
    sup_error,
    taylor_coeffs_kappa0,
    taylor_coeffs_kappa1,
)
from .polysketch import (
    PolySketchTree,
    apply_tensor_power_prefixes,
    apply_tensor_product,
    polysketch_new,
)
from .sketches import OsnapSketch, SrhtSketch, TensorSrhtSketch

__version__ = "0.1.0"
