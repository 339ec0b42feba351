"""Monte Carlo toolkit for first exit times of the isotropic alpha-stable
process from parabola-shaped regions: exact walk-on-balls harmonic-measure
sampling, Euler exit-time simulation, and estimators for the critical
integrability exponent and the decay laws it comes from.
"""

__version__ = "0.1.0"

from .ball_exit import (
    BallExitLaw,
    mean_exit_time_ball,
    poisson_constant,
    poisson_density,
    sample_ball_exit,
)
from .estimators import (
    ExponentFit,
    critical_exponent,
    fit_cylinder_decay,
    fit_log_log_exponent,
    fit_tail_index,
    harmonic_escape_probability,
    lemma2_bound,
    moment_estimate,
)
from .geometry import (
    Ball,
    Cylinder,
    InfiniteCylinder,
    ParabolaRegion,
    RegionSlice,
    contains,
    cylinder_contains,
    dist_to_complement,
    in_safe_zone,
    safe_ball_radius,
    slice_contains,
)
from .rng import RngStream
from .stable_sampling import (
    StableParams,
    sample_isotropic_increment,
    sample_positive_stable,
    sample_sym_stable_1d,
)
from .walkers import (
    ExitTimeSample,
    SurvivalCurve,
    WalkResult,
    WalkStatus,
    clopper_pearson,
    euler_exit_time,
    survival_curve,
    walk_on_balls,
)

__all__ = [
    "BallExitLaw", "Ball", "Cylinder", "ExitTimeSample", "ExponentFit",
    "InfiniteCylinder", "ParabolaRegion", "RegionSlice", "RngStream",
    "StableParams", "SurvivalCurve", "WalkResult", "WalkStatus",
    "clopper_pearson", "contains", "critical_exponent", "cylinder_contains",
    "dist_to_complement", "euler_exit_time", "fit_cylinder_decay",
    "fit_log_log_exponent", "fit_tail_index", "harmonic_escape_probability",
    "in_safe_zone", "lemma2_bound", "mean_exit_time_ball", "moment_estimate",
    "poisson_constant", "poisson_density", "safe_ball_radius",
    "sample_ball_exit", "sample_isotropic_increment",
    "sample_positive_stable", "sample_sym_stable_1d",
    "slice_contains", "survival_curve", "walk_on_balls",
]
