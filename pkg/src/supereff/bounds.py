"""Closed-form mismatch probability and MSE bounds for the exactly-normal estimator.

With a = c * sqrt(n) / sigma, the estimator N(mu, sigma^2 / n) leaves the band
[mu - c, mu + c] with probability 2 Phi(-a). Integrating its squared deviation
from mu over both tails gives the upper bound

    B(n) = c sigma sqrt(2 / pi) exp(-a^2 / 2) / sqrt(n) + 2 sigma^2 Phi(-a) / n,

and integrating the squared deviation from the clamped target itself gives
the exact MSE

    E[(theta - theta_clamped)^2] = 2 (sigma^2 / n) [(1 + a^2) Phi(-a) - a phi(a)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure
from .numeric import log_std_normal_cdf, mills_ratio, std_normal_cdf, std_normal_pdf

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _check(c, sigma, n):
    if not c > 0:
        raise ValueError("c must be > 0")
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")


def standardized_margin(c: float, sigma: float, n: float) -> float:
    return c * math.sqrt(n) / sigma


def mismatch_probability(c: float, sigma: float, n: int) -> float:
    _check(c, sigma, n)
    return 2.0 * std_normal_cdf(-standardized_margin(c, sigma, n))


def mse_upper_bound(c: float, sigma: float, n: int) -> float:
    _check(c, sigma, n)
    a = standardized_margin(c, sigma, n)
    first = c * sigma * _SQRT_2_OVER_PI * math.exp(-0.5 * a * a) / math.sqrt(n)
    second = 2.0 * sigma * sigma * std_normal_cdf(-a) / n
    return first + second


def log_mse_upper_bound(c: float, sigma: float, n: int) -> float:
    """log B(n); stays finite for n where B(n) itself underflows."""
    _check(c, sigma, n)
    a = standardized_margin(c, sigma, n)
    log_first = math.log(c * sigma * _SQRT_2_OVER_PI) - 0.5 * a * a - 0.5 * math.log(n)
    log_second = math.log(2.0 * sigma * sigma / n) + log_std_normal_cdf(-a)
    return float(np.logaddexp(log_first, log_second))


def exact_clamp_mse(c: float, sigma: float, n: int, method: str = "closed") -> float:
    """E[(theta_tilde - clamp(theta_tilde))^2] for theta_tilde ~ N(mu, sigma^2 / n).

    ``closed`` uses truncated-normal moments through the Mills ratio, which
    avoids forming Phi(-a) and the cancellation it brings in the deep tail.
    ``quad`` integrates the standardized tail (x - c)^2 density numerically.
    """
    _check(c, sigma, n)
    a = standardized_margin(c, sigma, n)
    s2 = sigma * sigma / n
    if method == "closed":
        bracket = (1.0 + a * a) * mills_ratio(a) - a
        return max(0.0, 2.0 * s2 * std_normal_pdf(a) * bracket)
    if method == "quad":
        # x = c + s t: 2 s^2 phi(a) * integral_0^inf t^2 exp(-t^2/2 - a t) dt
        val, err = integrate.quad(
            lambda t: t * t * math.exp(-0.5 * t * t - a * t), 0.0, math.inf,
            epsabs=0.0, epsrel=1e-12, limit=200,
        )
        if err > 1e-10 * abs(val):
            raise QuadratureFailure(f"exact_clamp_mse quadrature error {err:.3g} at a={a}")
        return 2.0 * s2 * std_normal_pdf(a) * val
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class BoundRow:
    n: int
    mismatch_prob: float
    mse_bound: float
    n_times_bound: float
    exact_mse: float

    FIELDS = ("n", "mismatch_prob", "mse_bound", "n_times_bound", "exact_mse")


def bound_row(c: float, sigma: float, n: int) -> BoundRow:
    b = mse_upper_bound(c, sigma, n)
    return BoundRow(n, mismatch_probability(c, sigma, n), b, n * b, exact_clamp_mse(c, sigma, n))
