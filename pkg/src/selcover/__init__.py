"""Leakage bounds for selected-target confidence coverage.

Exact leakage arithmetic on finite joint laws, closed-form bounds for
noisy and finite-message screening, and a seeded Monte Carlo harness for
the coverage of intervals reported for a data-selected coordinate.
"""

from selcover.bounds import (
    BoundReport,
    FullCovariance,
    Provenance,
    TraceBound,
    asymptotic_transfer,
    calibrate_tau,
    calibrate_tau_full,
    finite_message_alphabet_bound,
    finite_message_bound,
    gaussian_leakage,
    gaussian_noncoverage_bound,
    interval_trace_cap,
)
from selcover.errors import (
    DomainError,
    LabelMismatchError,
    NotPositiveSemidefiniteError,
    UndefinedConditionalError,
    ValidationError,
)
from selcover.jointlab import (
    JointModel,
    conditional_data,
    fixed_target_alpha,
    marginal_data,
    mutual_information,
    pinsker_bound,
    selected_noncoverage,
    theorem1_bound,
    tv_leakage,
)
from selcover.probkit import (
    FiniteDistribution,
    SymmetricMatrix,
    entropy,
    kl_divergence,
    log_det_scaled,
    normal_cdf,
    normal_quantile,
    tv_distance,
)
from selcover.sharpness import build_sharpness_instance, certify_sharpness
from selcover.simlab import (
    FixedCoordinate,
    NoisyScreening,
    SameSample,
    SimulationConfig,
    SplitSample,
    exact_same_sample_coverage,
    run_replication,
    run_simulation,
    table1,
)

__version__ = "0.1.0"
