"""Monte Carlo laboratory for superefficiency toward a clamped local average effect."""

__version__ = "0.1.0"

from .adaptive_target import (  # noqa: E402
    TargetContext,
    WeightingFunction,
    clamp_gap,
    clamp_target,
    construct_weights,
    heterogeneity_margin,
    verify_weighting,
)
from .bounds import exact_clamp_mse, mismatch_probability, mse_upper_bound  # noqa: E402
from .distributions import (  # noqa: E402
    EffectDistribution,
    PopulationSpec,
    Sample,
    asymptotic_sd,
    draw_sample,
    expect,
    sample_effect,
)
from .estimators import Estimate, EstimatorKind, estimate  # noqa: E402
from .numeric import RateFit, RatePoint, log_log_ols, std_normal_cdf, std_normal_pdf  # noqa: E402
from .rng import RandomStream, replication_seed  # noqa: E402
from .simulation import SimulationConfig, run_cell, run_experiment  # noqa: E402
