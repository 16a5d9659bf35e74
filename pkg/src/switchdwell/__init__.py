"""Dwell times, trapping regions and trajectory verification for switched systems."""

from .core import (
    ClassKFn,
    DwellViolation,
    Subsystem,
    SwitchedSystem,
    SwitchingSignal,
    make_affine_subsystem,
    signal_from_dwell,
    validate_dwell,
)
from .dwell import (
    DwellTable,
    TriangleAnalysis,
    epsilon0_search,
    global_dwell,
    local_dwell,
    mu_bound,
    pairwise_dwell,
    triangle_gap,
)
from .lyapunov import (
    CertificateReport,
    check_certificate,
    in_region,
    region_boundary_points,
    v_eval,
)
from .sim import (
    ConvergenceReport,
    Trajectory,
    TrappingReport,
    convergence_product,
    integrate,
    simulate_switched,
    tube_sample,
    verify_trapping,
    w_monitor,
)

__version__ = "0.1.0"

__all__ = [
    "ClassKFn",
    "Subsystem",
    "SwitchedSystem",
    "SwitchingSignal",
    "DwellViolation",
    "make_affine_subsystem",
    "signal_from_dwell",
    "validate_dwell",
    "DwellTable",
    "TriangleAnalysis",
    "pairwise_dwell",
    "local_dwell",
    "mu_bound",
    "global_dwell",
    "triangle_gap",
    "epsilon0_search",
    "CertificateReport",
    "v_eval",
    "in_region",
    "check_certificate",
    "region_boundary_points",
    "Trajectory",
    "TrappingReport",
    "ConvergenceReport",
    "integrate",
    "simulate_switched",
    "verify_trapping",
    "w_monitor",
    "convergence_product",
    "tube_sample",
]
