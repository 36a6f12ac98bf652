"""Scalar kernels: standard normal density/CDF and log-log least squares."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import special

from .errors import InsufficientPoints

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def std_normal_cdf(x: float) -> float:
    """Phi(x), computed through erfc so the left tail keeps relative accuracy."""
    if math.isnan(x):
        raise ValueError("std_normal_cdf undefined at NaN")
    if x == -math.inf:
        return 0.0
    if x == math.inf:
        return 1.0
    return 0.5 * math.erfc(-x * _INV_SQRT2)


def std_normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def log_std_normal_cdf(x: float) -> float:
    """log Phi(x); finite far below the point where Phi underflows."""
    return float(special.log_ndtr(x))


def mills_ratio(a: float) -> float:
    """Phi(-a) / phi(a) without forming either factor (stable for large a)."""
    return math.sqrt(math.pi / 2.0) * float(special.erfcx(a * _INV_SQRT2))


@dataclass(frozen=True)
class RatePoint:
    n: int
    value: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"RatePoint.n must be >= 1, got {self.n}")
        if not self.value >= 0:
            raise ValueError(f"RatePoint.value must be >= 0, got {self.value}")


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    n_points_used: int
    residual_rms: float

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "n_points_used": self.n_points_used,
            "residual_rms": self.residual_rms,
        }


def log_log_ols(points: Iterable[RatePoint]) -> RateFit:
    """Fit log(value) = intercept + slope * log(n) by ordinary least squares.

    Points with value == 0 are dropped; ``n_points_used`` reports the survivors.
    Raises InsufficientPoints when fewer than two usable points (or fewer than
    two distinct n) remain.
    """
    kept = [p for p in points if p.value > 0]
    if len(kept) < 2 or len({p.n for p in kept}) < 2:
        raise InsufficientPoints(
            f"need >= 2 points with value > 0 and distinct n, got {len(kept)}"
        )
    x = np.log(np.array([p.n for p in kept], dtype=np.float64))
    y = np.log(np.array([p.value for p in kept], dtype=np.float64))
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(np.dot(xc, yc) / np.dot(xc, xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    rms = float(math.sqrt(np.mean(resid * resid)))
    return RateFit(slope, intercept, len(kept), rms)
