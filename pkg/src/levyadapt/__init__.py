"""Adaptive pointwise kernel estimation of g(x) = x N(x) for pure-jump Levy processes."""
from .adaptive import (
    AdaptiveConfig,
    BandwidthGrid,
    SelectionTrace,
    adaptive_curve,
    bias_proxy_A,
    compute_C0,
    empirical_fourier_norms,
    select_bandwidth,
    variance_term,
)
from .bench import (
    ExperimentSpec,
    RiskReport,
    figure_spec,
    high_frequency_scheme,
    irregular_experiment,
    oracle_gap,
    rate_regression,
    run_experiment,
)
from .errors import (
    DegenerateC0,
    InsufficientObservationTime,
    InvalidBandwidth,
    LevyAdaptError,
    PreconditionError,
    UnsupportedCombination,
)
from .estimator import (
    FFTSettings,
    PointEstimate,
    estimate_curve,
    estimate_fourier,
    estimate_pair,
    estimate_point,
)
from .kernel import (
    BaseDensity,
    KernelSpec,
    build_kernel,
    convolve_kernels,
    eval_kernel,
    eval_scaled,
    kernel_fourier,
    kernel_moment,
)
from .levy_sim import (
    Example1,
    GammaProcess,
    IncrementSeries,
    Irregular,
    Merton,
    PowerDecay,
    Regular,
    VarianceGamma,
    read_increments_csv,
    sample_increments,
    true_g,
    write_increments_csv,
)

__version__ = "0.1.0"
