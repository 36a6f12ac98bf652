"""Heterogeneity margin, the clamped data-adaptive target, and its weighting witness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import EffectDistribution, expect, mean, support_bounds
from .errors import DegenerateEffects, TargetOutOfRange, UnattainableBoundary

EXACT_TOL = 1e-12
QUAD_TOL = 1e-9
MAX_BISECT = 200
# partial expectations feeding the bisection are integrated this tightly so
# quadrature noise stays well under QUAD_TOL
_INNER_EPSREL = 1e-13


@dataclass(frozen=True)
class TargetContext:
    mu: float
    c: float
    sigma: float

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError("TargetContext.c must be >= 0")
        if not self.sigma > 0:
            raise ValueError("TargetContext.sigma must be > 0")

    @property
    def band(self) -> tuple[float, float]:
        return self.mu - self.c, self.mu + self.c


def heterogeneity_margin(dist: EffectDistribution, *, allow_zero: bool = False) -> float:
    """c = min(sup - mean, mean - inf) from the exact support and mean."""
    lo, hi = support_bounds(dist)
    m = mean(dist)
    c = max(0.0, min(hi - m, m - lo))
    if c == 0.0 and not allow_zero:
        raise DegenerateEffects(
            f"{dist.kind} law has heterogeneity margin 0 (effect heterogeneity assumption fails)"
        )
    return c


def _check_c(ctx: TargetContext, allow_zero: bool):
    if ctx.c <= 0 and not (allow_zero and ctx.c == 0):
        raise DegenerateEffects("clamp requires a positive heterogeneity margin")


def clamp_target(theta_hat, ctx: TargetContext, *, allow_zero: bool = False):
    """The data-adaptive target: theta_hat inside [mu - c, mu + c], else the nearer band edge.

    Applied case by case on d = theta_hat - mu; accepts scalars or arrays.
    ``allow_zero`` admits c == 0 (negative-control runs), collapsing the band onto mu.
    """
    _check_c(ctx, allow_zero)
    mu, c = ctx.mu, ctx.c
    if np.ndim(theta_hat) == 0:
        d = theta_hat - mu
        if d > c:
            return mu + c
        if d < -c:
            return mu - c
        return theta_hat
    x = np.asarray(theta_hat, dtype=np.float64)
    d = x - mu
    return np.where(d > c, mu + c, np.where(d < -c, mu - c, x))


def clamp_gap(theta_hat, ctx: TargetContext, *, allow_zero: bool = False):
    """max(0, |theta_hat - mu| - c), the distance from theta_hat to the target."""
    _check_c(ctx, allow_zero)
    if np.ndim(theta_hat) == 0:
        return max(0.0, abs(theta_hat - ctx.mu) - ctx.c)
    return np.maximum(0.0, np.abs(np.asarray(theta_hat, dtype=np.float64) - ctx.mu) - ctx.c)


@dataclass(frozen=True)
class WeightingFunction:
    """w(t) = (1 - lambda) + lambda * 1{t >= threshold} (up), 1{t <= threshold} (down), or 1 (flat)."""

    direction: str
    lam: float
    threshold: float

    def __post_init__(self):
        if self.direction not in ("up", "down", "flat"):
            raise ValueError(f"bad direction {self.direction!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")

    def __call__(self, t):
        if self.direction == "flat":
            return np.ones_like(np.asarray(t, dtype=np.float64))[()] if np.ndim(t) else 1.0
        t = np.asarray(t, dtype=np.float64)
        hit = t >= self.threshold if self.direction == "up" else t <= self.threshold
        out = (1.0 - self.lam) + self.lam * hit
        return out[()] if out.ndim == 0 else out

    def as_dict(self) -> dict:
        return {"direction": self.direction, "lambda": self.lam, "threshold": self.threshold}


FLAT = WeightingFunction("flat", 0.0, math.nan)


def _moments(dist, w_fn, lo=None, hi=None, breakpoints=()):
    """(E[w tau], E[w]) with tolerances suited to ratios of small integrals.

    The mass is integrated to relative precision first; E[w tau] may cancel
    to near zero, so its absolute tolerance is set by mass * max|tau|.
    """
    if dist.is_atomic:
        return (expect(dist, lambda t: w_fn(t) * t, lo, hi),
                expect(dist, lambda t: w_fn(t), lo, hi))
    den = expect(dist, w_fn, lo, hi, epsabs=0.0, epsrel=_INNER_EPSREL, breakpoints=breakpoints)
    scale = max(abs(v) for v in support_bounds(dist)) or 1.0
    num = expect(dist, lambda t: w_fn(t) * t, lo, hi, epsabs=_INNER_EPSREL * den * scale,
                 epsrel=_INNER_EPSREL, breakpoints=breakpoints)
    return num, den


def _tail(dist, m, direction):
    """(E[tau ; tail], P(tail)) for the tail {tau >= m} or {tau <= m}."""
    lo, hi = (m, None) if direction == "up" else (None, m)
    return _moments(dist, lambda t: 1.0, lo, hi)


def _tilted_mean(lam, mu, tail_num, tail_mass):
    return ((1.0 - lam) * mu + lam * tail_num) / ((1.0 - lam) + lam * tail_mass)


def tolerance_for(dist: EffectDistribution) -> float:
    return EXACT_TOL if dist.is_atomic else QUAD_TOL


def construct_weights(dist: EffectDistribution, m: float, *, strict: bool = False) -> WeightingFunction:
    """A nonnegative indicator tilt whose weighted mean of tau equals ``m``.

    For m above the mean, bisect lambda on the increasing map
    g(lambda) = E[w tau] / E[w] with w up-tilted at threshold m; g(0) is the
    mean and g(1) = E[tau | tau >= m] >= m. Symmetric for m below the mean.

    A band edge that is an atom gets the point-mass weighting (lambda = 1).
    A band edge carrying no mass has no exact witness; by default the
    threshold is pulled inward until the weighted mean is within
    tolerance/4 of m, and ``strict=True`` raises UnattainableBoundary instead.
    """
    mu = mean(dist)
    if m == mu:
        return FLAT
    c = heterogeneity_margin(dist, allow_zero=True)
    if not (mu - c <= m <= mu + c):
        raise TargetOutOfRange(m, mu - c, mu + c)
    direction = "up" if m > mu else "down"
    tol = tolerance_for(dist)
    s_lo, s_hi = support_bounds(dist)
    edge = s_hi if direction == "up" else s_lo
    if m == edge:
        if dist.is_atomic:
            return WeightingFunction(direction, 1.0, m)
        if strict:
            raise UnattainableBoundary(
                f"{dist.kind}: target {m!r} is a support endpoint with zero mass"
            )
        return _near_edge_witness(dist, m, direction, tol)

    num, mass = _tail(dist, m, direction)
    sign = 1.0 if direction == "up" else -1.0
    lo_l, hi_l = 0.0, 1.0
    lam = 1.0
    for _ in range(MAX_BISECT):
        lam = 0.5 * (lo_l + hi_l)
        resid = _tilted_mean(lam, mu, num, mass) - m
        if abs(resid) <= 0.01 * tol or lam in (lo_l, hi_l):
            break
        if sign * resid < 0:
            lo_l = lam
        else:
            hi_l = lam
    return WeightingFunction(direction, lam, m)


def _near_edge_witness(dist, m, direction, tol):
    """Point-mass-like tilt on the tail beyond t, with t walked toward m by halving."""
    inner = mean(dist)
    goal = tol / 4.0
    for _ in range(MAX_BISECT):
        t = 0.5 * (inner + m)
        if t in (inner, m):
            break
        num, mass = _tail(dist, t, direction)
        if mass > 0 and abs(m - num / mass) <= goal:
            return WeightingFunction(direction, 1.0, t)
        inner = t
    raise UnattainableBoundary(
        f"{dist.kind}: no indicator weighting reaches {m!r} within {goal:.1e}"
    )


def verify_weighting(dist: EffectDistribution, w: WeightingFunction, m: float) -> float:
    """E[w tau] / E[w] - m via the law's expectation functional."""
    bp = () if w.direction == "flat" else (w.threshold,)
    num, den = _moments(dist, lambda t: float(w(t)), breakpoints=bp)
    if not den > 0:
        raise ValueError("weighting has E[w] = 0")
    return num / den - m
