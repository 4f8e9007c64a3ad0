"""Gradient filtering for stochastic optimization.

Treats the stream of stochastic gradients as a noisy signal and runs it
through a filter (moving-average, autoregressive, scalar Kalman, or
wavelet shrinkage) before each descent step. Ships the filters, the
optimization loops, a non-convex 2D benchmark, a small MNIST network
with manual backpropagation, and a sweep harness with CSV/SVG output.
"""

from .errors import (
    ConfigError,
    DataError,
    DivergenceError,
    IdxDimensionError,
    IdxMagicError,
    IdxTruncatedError,
)
from .filters import (
    AutoRegressiveFilter,
    GradientFilter,
    MovingAverageFilter,
    ScalarKalmanFilter,
    WaveletShrinkageFilter,
)
from .harness import (
    ExperimentSpec,
    format_config,
    parse_config,
    read_metrics_csv,
    run_study,
    write_metrics_csv,
)
from .mlp import (
    Dataset,
    MLPModel,
    augment_pad_crop,
    backward,
    evaluate,
    forward,
    init_mlp,
    load_mnist_idx,
    softmax_cross_entropy,
    train,
)
from .optimizers import (
    METHOD_LABELS,
    METHODS,
    AdamState,
    OptimizerConfig,
    StepRecord,
    Trajectory,
    UpdateEngine,
    adam_direction,
    adam_step,
    build_filter,
    default_config,
    fgd_step,
    lr_decay,
    run_optimization,
    sgd_step,
    validate_config,
)
from .plots import PLOT_KINDS, emit_svg_plot
from .problems import (
    START_POINT,
    NonConvexProblem,
    eval_f,
    grad_f,
    grid_minimum,
    noisy_grad,
)
from .wavelet import (
    WaveletBasis,
    WaveletCoeffs,
    db4_basis,
    dwt_multilevel,
    dwt_single,
    idwt_multilevel,
    idwt_single,
    soft_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "ConfigError", "DataError", "DivergenceError", "IdxDimensionError",
    "IdxMagicError", "IdxTruncatedError",
    # filters
    "GradientFilter", "MovingAverageFilter", "AutoRegressiveFilter",
    "ScalarKalmanFilter", "WaveletShrinkageFilter",
    # wavelet
    "WaveletBasis", "WaveletCoeffs", "db4_basis", "dwt_single",
    "idwt_single", "dwt_multilevel", "idwt_multilevel", "soft_threshold",
    # problems
    "START_POINT", "NonConvexProblem", "eval_f", "grad_f", "grid_minimum",
    "noisy_grad",
    # optimizers
    "METHODS", "METHOD_LABELS", "OptimizerConfig", "validate_config",
    "default_config", "build_filter", "AdamState", "sgd_step",
    "adam_direction", "adam_step", "fgd_step", "lr_decay", "UpdateEngine",
    "StepRecord", "Trajectory", "run_optimization",
    # mlp
    "Dataset", "MLPModel", "load_mnist_idx", "augment_pad_crop", "init_mlp",
    "forward", "softmax_cross_entropy", "backward", "train", "evaluate",
    # harness
    "ExperimentSpec", "parse_config", "format_config", "run_study",
    "write_metrics_csv", "read_metrics_csv",
    # plots
    "PLOT_KINDS", "emit_svg_plot",
]
