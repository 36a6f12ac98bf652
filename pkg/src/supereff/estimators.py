"""Root-n consistent, asymptotically normal estimators of the mean effect."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Sample
from .errors import EmptyArm
from .rng import RandomStream

TAGS = ("oracle_tau_mean", "difference_in_means", "synthetic_normal")
TAG_CODES = {t: i for i, t in enumerate(TAGS)}


@dataclass(frozen=True)
class EstimatorKind:
    tag: str
    synthetic_sigma: float | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown estimator tag {self.tag!r}; expected one of {TAGS}")
        if self.tag == "synthetic_normal":
            if self.synthetic_sigma is None or not self.synthetic_sigma > 0:
                raise ValueError("synthetic_normal requires synthetic_sigma > 0")
        elif self.synthetic_sigma is not None:
            raise ValueError(f"synthetic_sigma only applies to synthetic_normal, not {self.tag}")

    @property
    def code(self) -> int:
        return TAG_CODES[self.tag]

    def as_dict(self) -> dict:
        d = {"tag": self.tag}
        if self.synthetic_sigma is not None:
            d["synthetic_sigma"] = self.synthetic_sigma
        return d


@dataclass(frozen=True)
class Estimate:
    theta_hat: float
    sigma_hat: float


def _sd(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if x.size > 1 else 0.0


def estimate(kind: EstimatorKind, sample: Sample, mu: float, rng: RandomStream) -> Estimate:
    """Run one estimator on one sample.

    ``synthetic_normal`` ignores the sample's outcomes and returns
    mu + sigma * Z / sqrt(n), with Z drawn by Box-Muller from the next two
    counters of ``rng``; its finite-sample law is exactly N(mu, sigma^2 / n).
    """
    n = sample.n
    if kind.tag == "oracle_tau_mean":
        tau = np.asarray(sample.tau_latent, dtype=np.float64)
        return Estimate(float(tau.mean()), _sd(tau))
    if kind.tag == "difference_in_means":
        z = np.asarray(sample.z).astype(bool)
        y = np.asarray(sample.y_obs, dtype=np.float64)
        y1, y0 = y[z], y[~z]
        if y1.size == 0 or y0.size == 0:
            raise EmptyArm(f"n={n}: treated={y1.size}, control={y0.size}")
        theta = float(y1.mean() - y0.mean())
        s1, s0 = _sd(y1), _sd(y0)
        return Estimate(theta, math.sqrt(n * (s1 * s1 / y1.size + s0 * s0 / y0.size)))
    z_draw = rng.standard_normal()
    sigma = kind.synthetic_sigma
    return Estimate(mu + sigma * z_draw / math.sqrt(n), sigma)
