"""Certified verification of the per-eigenvalue counting inequality and
the averaged eigenvalue inequalities on cylindrical strips S^1 x (0, h),
with exact-value arithmetic and finite, provably sufficient searches."""

from .exact import (
    Ball,
    CertificateFailure,
    DomainError,
    ExactValue,
    PI,
    Undecided,
    atan,
    canonicalize,
    compare,
    decimal_str,
    eval_ball,
    gamma_half_integer,
    parse_exact,
    quadratic_pi_surd,
    rational,
    sign,
    sqrt,
    to_prefix,
    value_json,
)
from .spectrum import (
    EigenIndex,
    InvalidHeight,
    SpectrumSlice,
    counting_function,
    crossover_points,
    eigenvalue,
    enumerate_up_to,
    kth_eigenvalue,
)
from .sweep import WeightedInterval, coverage_at, coverage_ranges
from .polya import (
    FailureReport,
    Verdict,
    all_failure_reports,
    failure_set_for_k,
    k_interval,
    polya_verdict,
    r_bound_first,
    r_bound_second,
)
from .liyau import (
    LiYauVerdict,
    PartitionCell,
    build_partition,
    corollary_certificate,
    exceptional_orders,
    liyau_check_cell,
    liyau_verdict,
    lowrange_certificates,
    relaxed_interval,
)
from .asymptotics import (
    AreaRange,
    ArityError,
    BracketError,
    Threshold,
    disk_critical_radius,
    disk_rayleigh_bound,
    eta1,
    hypercube_threshold,
    isoperimetric_ranges,
    product_necessary_condition,
    product_sufficient_condition,
)

__version__ = "0.1.0"
