"""Renewal-reward process with prescribed anomalous moderate-deviation
windows: exact measure computations, stationary samplers, path
decomposition, tail oracles, and rate certificates."""

from .chain import (
    ORIGIN,
    ChainState,
    RngStream,
    run_path,
    sample_p_interval,
    sample_stationary_state,
    stationary_push_l1,
    step,
)
from .composite import (
    CompositeProcess,
    WindowSet,
    build_composite,
    composite_predicted_rate,
    sample_composite_path,
)
from .errors import (
    BracketEmptyError,
    ParameterError,
    PrecisionError,
    StateIndexError,
    WindowBoundaryError,
)
from .measure import (
    MEAN_TAU,
    MU0,
    MeasureTable,
    Params,
    ProcessStats,
    ScaleWindow,
    build_measure_table,
    log_interval_tail,
    log_mu,
    log_p,
    mean_tau,
    p1,
    params_from_window,
    second_moment_jump,
    sigma,
    validate_params,
    window_from_params,
)
from .oracles import (
    RateCertificate,
    RateQuery,
    TailEstimate,
    autocovariance_bound,
    autocovariance_exact,
    boundary_sum_sup,
    boundary_tail_exact,
    case1_upper,
    case2_certificate,
    gaussian_reference,
    mc_tail,
    mc_tail_curve,
    predicted_rate,
    rate_transform,
    wilson_interval,
)
from .paths import (
    SignedPath,
    SumDecomposition,
    decompose,
    excursion_reward_magnitude,
    generate_path,
    iter_sums,
    phi,
    s_double_prime_count,
    s_prime_count,
)

__version__ = "0.1.0"

__all__ = [
    "BracketEmptyError",
    "ChainState",
    "CompositeProcess",
    "MEAN_TAU",
    "MU0",
    "MeasureTable",
    "ORIGIN",
    "ParameterError",
    "Params",
    "PrecisionError",
    "ProcessStats",
    "RateCertificate",
    "RateQuery",
    "RngStream",
    "ScaleWindow",
    "SignedPath",
    "StateIndexError",
    "SumDecomposition",
    "TailEstimate",
    "WindowBoundaryError",
    "WindowSet",
    "autocovariance_bound",
    "autocovariance_exact",
    "boundary_sum_sup",
    "boundary_tail_exact",
    "build_composite",
    "build_measure_table",
    "case1_upper",
    "case2_certificate",
    "composite_predicted_rate",
    "decompose",
    "excursion_reward_magnitude",
    "gaussian_reference",
    "generate_path",
    "iter_sums",
    "log_interval_tail",
    "log_mu",
    "log_p",
    "mc_tail",
    "mc_tail_curve",
    "mean_tau",
    "p1",
    "params_from_window",
    "phi",
    "predicted_rate",
    "rate_transform",
    "run_path",
    "s_double_prime_count",
    "s_prime_count",
    "sample_composite_path",
    "sample_p_interval",
    "sample_stationary_state",
    "second_moment_jump",
    "sigma",
    "stationary_push_l1",
    "step",
    "validate_params",
    "wilson_interval",
    "window_from_params",
]
