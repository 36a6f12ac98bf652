"""Deterministic Monte Carlo engine: cells of replications, summaries, and rate fits."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, bounds
from .adaptive_target import TargetContext, clamp_target, heterogeneity_margin
from .distributions import PopulationSpec, asymptotic_sd, mean
from .errors import InsufficientPoints, ValidationError
from .estimators import EstimatorKind
from .numeric import RateFit, RatePoint, log_log_ols
from .rng import replication_seed  # noqa: F401  (re-exported)

MIN_MISMATCH_EVENTS = 50
MIN_REPLICATIONS = 100


@dataclass(frozen=True)
class SimulationConfig:
    population: PopulationSpec
    estimator: EstimatorKind
    n_grid: tuple
    replications: int
    master_seed: int
    record_replications: bool = False
    negative_control: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.n_grid:
            raise ValidationError("n_grid", "must be nonempty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValidationError("n_grid", "n_grid not strictly increasing")
        min_n = 1 if self.estimator.tag == "synthetic_normal" else 2
        if self.n_grid[0] < min_n:
            raise ValidationError("n_grid", f"sizes must be >= {min_n} for {self.estimator.tag}")
        if self.replications < MIN_REPLICATIONS:
            raise ValidationError("replications", f"must be >= {MIN_REPLICATIONS}")
        if not 0 <= self.master_seed < 2**64:
            raise ValidationError("master_seed", "must be an unsigned 64-bit integer")
        c = heterogeneity_margin(self.population.effect, allow_zero=True)
        if c == 0.0 and not self.negative_control:
            raise ValidationError(
                "population.effect",
                "heterogeneity margin c = 0 violates the effect heterogeneity assumption "
                "(c > 0); set negative_control to run the degenerate control",
            )

    def target_context(self) -> TargetContext:
        effect = self.population.effect
        return TargetContext(
            mu=mean(effect),
            c=heterogeneity_margin(effect, allow_zero=self.negative_control),
            sigma=asymptotic_sd(self.population, self.estimator),
        )


@dataclass(frozen=True)
class ReplicationRecord:
    n: int
    rep: int
    theta_hat: float
    theta_Fn: float
    err_pop: float
    err_adaptive: float
    mismatch: bool

    FIELDS = ("n", "rep", "theta_hat", "theta_Fn", "err_pop", "err_adaptive", "mismatch")


@dataclass
class CellSummary:
    n: int
    R_effective: int
    mse_pop: float
    mse_pop_se: float
    mse_adaptive: float
    mse_adaptive_se: float
    mismatch_rate: float
    mismatch_se: float
    discards: int
    sigma_hat_mean: float = field(default=math.nan, compare=False)

    FIELDS = (
        "n", "R_effective", "mse_pop", "mse_pop_se", "mse_adaptive", "mse_adaptive_se",
        "mismatch_rate", "mismatch_se", "discards",
    )

    @property
    def mismatch_events(self) -> int:
        return int(round(self.mismatch_rate * self.R_effective))


@dataclass
class CellResult:
    summary: CellSummary
    theta_hat: np.ndarray
    theta_Fn: np.ndarray
    err_pop: np.ndarray
    err_adaptive: np.ndarray
    mismatch: np.ndarray

    def records(self):
        n = self.summary.n
        for i in range(self.theta_hat.size):
            yield ReplicationRecord(
                n, i, float(self.theta_hat[i]), float(self.theta_Fn[i]), float(self.err_pop[i]),
                float(self.err_adaptive[i]), bool(self.mismatch[i]),
            )


def _chunks(total: int, workers: int):
    workers = max(1, min(workers, total))
    edges = np.linspace(0, total, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def run_cell(
    config: SimulationConfig,
    n: int,
    *,
    workers: int = 1,
    backend: str | None = None,
    force_zero_noise: bool = False,
    ctx: TargetContext | None = None,
) -> CellResult:
    """Run all replications for sample size ``n`` and aggregate them.

    Replications are split into contiguous index ranges, one per worker; each
    replication's stream depends only on (master_seed, n, rep), and the
    aggregation sees the concatenated arrays in replication order, so the
    result does not depend on ``workers``. ``force_zero_noise`` pins the
    synthetic estimator's normal draw to 0 (test hook).
    """
    if n not in config.n_grid:
        raise ValueError(f"n={n} not in the configured n_grid")
    if force_zero_noise and config.estimator.tag != "synthetic_normal":
        raise ValueError("force_zero_noise only applies to synthetic_normal")
    ctx = ctx or config.target_context()
    pop = config.population
    est = config.estimator
    args = (
        est.code, pop.baseline.law_vector(), pop.effect.law_vector(), pop.assignment_prob,
        est.synthetic_sigma or 0.0, ctx.mu, n, config.master_seed,
    )
    R = config.replications
    parts = _chunks(R, workers)

    def job(bounds_):
        return _kernels.cell_estimates(*args, *bounds_, force_zero_noise, backend=backend)

    if len(parts) == 1:
        outs = [job(parts[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            outs = list(pool.map(job, parts))
    theta = np.concatenate([o[0] for o in outs])
    sig = np.concatenate([o[1] for o in outs])
    discards = int(sum(int(o[2].sum()) for o in outs))

    allow_zero = config.negative_control
    theta_fn = clamp_target(theta, ctx, allow_zero=allow_zero)
    err_pop = theta - ctx.mu
    gap = np.maximum(0.0, np.abs(err_pop) - ctx.c)
    err_adaptive = np.copysign(gap, err_pop)
    mismatch = np.abs(err_pop) > ctx.c

    mse_pop, mse_pop_se = _mean_se(err_pop * err_pop)
    mse_ad, mse_ad_se = _mean_se(err_adaptive * err_adaptive)
    rate = float(np.count_nonzero(mismatch)) / R
    summary = CellSummary(
        n=n, R_effective=R, mse_pop=mse_pop, mse_pop_se=mse_pop_se,
        mse_adaptive=mse_ad, mse_adaptive_se=mse_ad_se, mismatch_rate=rate,
        mismatch_se=math.sqrt(rate * (1.0 - rate) / R), discards=discards,
        sigma_hat_mean=float(np.mean(sig)),
    )
    return CellResult(summary, theta, theta_fn, err_pop, err_adaptive, mismatch)


def _fit_or_none(points) -> dict:
    usable = [p for p in points if p.value > 0]
    try:
        return log_log_ols(points).to_dict()
    except InsufficientPoints:
        return {"slope": None, "intercept": None, "n_points_used": len(usable), "residual_rms": None}


def fit_rates(cells) -> dict:
    """Log-log slopes for mse_pop and mse_adaptive.

    Cells with fewer than MIN_MISMATCH_EVENTS mismatches are left out of the
    adaptive fit. Only CSV-visible summary fields are read, so the result
    can be recomputed from a cells file.
    """
    pop_pts = [RatePoint(c.n, c.mse_pop) for c in cells]
    ad_pts = [
        RatePoint(c.n, c.mse_adaptive) for c in cells
        if c.mismatch_events >= MIN_MISMATCH_EVENTS
    ]
    return {"mse_pop": _fit_or_none(pop_pts), "mse_adaptive": _fit_or_none(ad_pts)}


@dataclass(frozen=True)
class BoundCheckRow:
    n: int
    mse_adaptive: float
    mse_adaptive_se: float
    mse_bound: float
    exact_mse: float
    within_bound: bool
    oracle_z: float

    FIELDS = ("n", "mse_adaptive", "mse_adaptive_se", "mse_bound", "exact_mse", "within_bound", "oracle_z")


def bound_check(cells, ctx: TargetContext) -> list[BoundCheckRow]:
    """Compare each synthetic-estimator cell against the closed-form bound and exact MSE."""
    rows = []
    for cell in cells:
        b = bounds.mse_upper_bound(ctx.c, ctx.sigma, cell.n)
        exact = bounds.exact_clamp_mse(ctx.c, ctx.sigma, cell.n)
        rel_se = cell.mse_adaptive_se / cell.mse_adaptive if cell.mse_adaptive > 0 else 0.0
        z = (cell.mse_adaptive - exact) / cell.mse_adaptive_se if cell.mse_adaptive_se > 0 else 0.0
        rows.append(BoundCheckRow(
            cell.n, cell.mse_adaptive, cell.mse_adaptive_se, b, exact,
            cell.mse_adaptive <= b * (1.0 + 5.0 * rel_se), z,
        ))
    return rows


@dataclass
class ExperimentResult:
    config: SimulationConfig
    context: TargetContext
    cells: list
    rates: dict
    bound_rows: list
    replications: dict = field(default_factory=dict)


def run_experiment(config: SimulationConfig, *, workers: int = 1, backend: str | None = None) -> ExperimentResult:
    ctx = config.target_context()
    results = [run_cell(config, n, workers=workers, backend=backend, ctx=ctx) for n in config.n_grid]
    cells = [r.summary for r in results]
    reps = {r.summary.n: r for r in results} if config.record_replications else {}
    checks = bound_check(cells, ctx) if config.estimator.tag == "synthetic_normal" and ctx.c > 0 else []
    return ExperimentResult(config, ctx, cells, fit_rates(cells), checks, reps)
