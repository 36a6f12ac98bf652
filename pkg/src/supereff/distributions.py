"""Bounded effect laws and the potential-outcomes data-generating process."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .errors import DegenerateVariance, QuadratureFailure
from .rng import RandomStream

KINDS = ("degenerate", "two_point", "uniform", "scaled_beta")
KIND_CODES = {k: i for i, k in enumerate(KINDS)}

QUAD_EPSABS = 1e-10
QUAD_LIMIT = 200
BETA_BISECT_STEPS = 60


@dataclass(frozen=True)
class EffectDistribution:
    """A bounded law on the real line.

    ``params`` by kind: degenerate (v,), two_point (a, b, p) with P(b) = p,
    uniform (lo, hi), scaled_beta (alpha, beta, lo, hi).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        _validate(self.kind, self.params)

    @classmethod
    def degenerate(cls, v):
        return cls("degenerate", (v,))

    @classmethod
    def two_point(cls, a, b, p):
        return cls("two_point", (a, b, p))

    @classmethod
    def uniform(cls, lo, hi):
        return cls("uniform", (lo, hi))

    @classmethod
    def scaled_beta(cls, alpha, beta, lo=0.0, hi=1.0):
        return cls("scaled_beta", (alpha, beta, lo, hi))

    @property
    def is_atomic(self) -> bool:
        return self.kind in ("degenerate", "two_point")

    def mean(self) -> float:
        return mean(self)

    def support_bounds(self) -> tuple[float, float]:
        return support_bounds(self)

    def variance(self) -> float:
        return variance(self)

    def as_dict(self) -> dict:
        names = _PARAM_NAMES[self.kind]
        return {"kind": self.kind, **dict(zip(names, self.params))}

    def law_vector(self) -> np.ndarray:
        """Flat float64 encoding (code, p0..p3) consumed by the compiled kernels."""
        out = np.zeros(5)
        out[0] = KIND_CODES[self.kind]
        out[1 : 1 + len(self.params)] = self.params
        return out


_PARAM_NAMES = {
    "degenerate": ("value",),
    "two_point": ("a", "b", "p"),
    "uniform": ("lo", "hi"),
    "scaled_beta": ("alpha", "beta", "lo", "hi"),
}


def _validate(kind, params):
    if kind not in _PARAM_NAMES:
        raise ValueError(f"unknown distribution kind {kind!r}; expected one of {KINDS}")
    if len(params) != len(_PARAM_NAMES[kind]):
        raise ValueError(f"{kind} takes parameters {_PARAM_NAMES[kind]}, got {params}")
    if not all(math.isfinite(v) for v in params):
        raise ValueError(f"{kind} parameters must be finite (bounded support only), got {params}")
    if kind == "two_point":
        a, b, p = params
        if not a < b:
            raise ValueError("two_point requires a < b")
        if not 0.0 < p < 1.0:
            raise ValueError("two_point requires 0 < p < 1")
    elif kind == "uniform":
        if not params[0] < params[1]:
            raise ValueError("uniform requires lo < hi")
    elif kind == "scaled_beta":
        alpha, beta, lo, hi = params
        if not (alpha > 0 and beta > 0):
            raise ValueError("scaled_beta requires alpha > 0 and beta > 0")
        if not lo < hi:
            raise ValueError("scaled_beta requires lo < hi")


def mean(dist: EffectDistribution) -> float:
    k, p = dist.kind, dist.params
    if k == "degenerate":
        return p[0]
    if k == "two_point":
        a, b, q = p
        return (1.0 - q) * a + q * b
    if k == "uniform":
        return 0.5 * (p[0] + p[1])
    alpha, beta, lo, hi = p
    return lo + (hi - lo) * alpha / (alpha + beta)


def variance(dist: EffectDistribution) -> float:
    k, p = dist.kind, dist.params
    if k == "degenerate":
        return 0.0
    if k == "two_point":
        a, b, q = p
        return q * (1.0 - q) * (b - a) ** 2
    if k == "uniform":
        return (p[1] - p[0]) ** 2 / 12.0
    alpha, beta, lo, hi = p
    s = alpha + beta
    return (hi - lo) ** 2 * alpha * beta / (s * s * (s + 1.0))


def support_bounds(dist: EffectDistribution) -> tuple[float, float]:
    k, p = dist.kind, dist.params
    if k == "degenerate":
        return p[0], p[0]
    if k == "two_point":
        return p[0], p[1]
    if k == "uniform":
        return p[0], p[1]
    return p[2], p[3]


def quantile(dist: EffectDistribution, u):
    """Inverse CDF applied to uniforms in [0, 1); vectorised."""
    u = np.asarray(u, dtype=np.float64)
    k, p = dist.kind, dist.params
    if k == "degenerate":
        return np.full(u.shape, p[0])
    if k == "two_point":
        a, b, q = p
        return np.where(u < q, b, a)
    if k == "uniform":
        lo, hi = p
        return lo + (hi - lo) * u
    alpha, beta, lo, hi = p
    return lo + (hi - lo) * beta_ppf_bisect(alpha, beta, u)


def beta_ppf_bisect(alpha: float, beta: float, u):
    """Regularized-incomplete-beta inverse by a fixed number of bisection steps."""
    u = np.asarray(u, dtype=np.float64)
    left = np.zeros_like(u)
    right = np.ones_like(u)
    for _ in range(BETA_BISECT_STEPS):
        mid = 0.5 * (left + right)
        below = special.betainc(alpha, beta, mid) < u
        left = np.where(below, mid, left)
        right = np.where(below, right, mid)
    return 0.5 * (left + right)


def sample_effect(dist: EffectDistribution, rng: RandomStream, size: int | None = None):
    """Draw from ``dist`` by inverse CDF on the stream's next uniforms."""
    u = rng.uniform(size)
    out = quantile(dist, u)
    return float(out) if size is None else out


def _pieces(dist: EffectDistribution, a: float, b: float, cuts):
    """Integration pieces as (integrand factory, left, right, quad kwargs) in a convenient variable.

    Uniform laws integrate f against a constant density on [a, b]. Scaled beta
    laws move to u = (t - lo) / (hi - lo); a piece touching u = 0 or u = 1
    hands the algebraic endpoint factor to QUADPACK's QAWS weight so that
    shapes below 1 are integrated accurately.
    """
    edges = [a, *cuts, b]
    if dist.kind == "uniform":
        lo, hi = dist.params
        h = 1.0 / (hi - lo)
        for left, right in zip(edges[:-1], edges[1:]):
            yield (lambda f: (lambda t: f(t) * h)), left, right, {}
        return
    alpha, beta, lo, hi = dist.params
    width = hi - lo
    inv_b = math.exp(-special.betaln(alpha, beta))
    for left, right in zip(edges[:-1], edges[1:]):
        ua, ub = (left - lo) / width, (right - lo) / width
        wa = alpha - 1.0 if ua == 0.0 else 0.0
        wb = beta - 1.0 if ub == 1.0 else 0.0
        ea, eb = alpha - 1.0 - wa, beta - 1.0 - wb

        def factory(f, ea=ea, eb=eb):
            def g(u):
                dens = inv_b
                if ea:
                    dens *= u**ea
                if eb:
                    dens *= (1.0 - u) ** eb
                return f(lo + width * u) * dens
            return g

        kw = {"weight": "alg", "wvar": (wa, wb)} if (wa or wb) else {}
        yield factory, ua, ub, kw


def expect(
    dist: EffectDistribution,
    f: Callable[[float], float],
    lo: float | None = None,
    hi: float | None = None,
    *,
    epsabs: float = QUAD_EPSABS,
    epsrel: float = QUAD_EPSABS,
    breakpoints: Sequence[float] = (),
) -> float:
    """E[f(tau) ; lo <= tau <= hi] (defaults: the whole support).

    Atomic laws are summed exactly. Continuous laws use adaptive Gauss-Kronrod
    quadrature; QuadratureFailure is raised when the error estimate misses
    max(epsabs, epsrel * |result|).
    """
    s_lo, s_hi = support_bounds(dist)
    a = s_lo if lo is None else max(lo, s_lo)
    b = s_hi if hi is None else min(hi, s_hi)
    if dist.kind == "degenerate":
        v = dist.params[0]
        return float(f(v)) if a <= v <= b else 0.0
    if dist.kind == "two_point":
        x0, x1, q = dist.params
        total = 0.0
        if a <= x0 <= b:
            total += (1.0 - q) * f(x0)
        if a <= x1 <= b:
            total += q * f(x1)
        return float(total)
    if not a < b:
        return 0.0
    cuts = sorted(x for x in breakpoints if a < x < b)
    total = 0.0
    for factory, left, right, kw in _pieces(dist, a, b, cuts):
        val, err = integrate.quad(
            factory(f), left, right, epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT, **kw
        )[:2]
        if not math.isfinite(val) or err > max(epsabs, epsrel * abs(val)):
            raise QuadratureFailure(
                f"{dist.kind} on [{left}, {right}]: error estimate {err:.3g} exceeds tolerance"
            )
        total += val
    return float(total)


@dataclass(frozen=True)
class PopulationSpec:
    """Y(0) ~ baseline, tau ~ effect independent of Y(0), Y(1) = Y(0) + tau, Z ~ Bernoulli(p)."""

    baseline: EffectDistribution
    effect: EffectDistribution
    assignment_prob: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.assignment_prob < 1.0:
            raise ValueError("assignment_prob must lie in (0, 1)")


@dataclass(frozen=True)
class Sample:
    n: int
    y_obs: np.ndarray
    z: np.ndarray
    tau_latent: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.y_obs, other.y_obs)
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.tau_latent, other.tau_latent)
        )

    __hash__ = None


def draw_sample(pop: PopulationSpec, n: int, rng: RandomStream) -> Sample:
    """Draw n units; consumes 3n counters of ``rng`` (interleaved z, y0, tau)."""
    if n < 2:
        raise ValueError("draw_sample requires n >= 2")
    u = rng.uniform(3 * n).reshape(n, 3)
    z = (u[:, 0] < pop.assignment_prob).astype(np.int8)
    y0 = quantile(pop.baseline, u[:, 1])
    tau = quantile(pop.effect, u[:, 2])
    return Sample(n, y0 + z * tau, z, tau)


def asymptotic_sd(pop: PopulationSpec, estimator) -> float:
    """sigma in sqrt(n) (theta_hat - mu) -> N(0, sigma^2) for the given estimator."""
    tag = estimator.tag
    if tag == "synthetic_normal":
        sd = float(estimator.synthetic_sigma)
    elif tag == "oracle_tau_mean":
        sd = math.sqrt(variance(pop.effect))
    elif tag == "difference_in_means":
        p = pop.assignment_prob
        v0 = variance(pop.baseline)
        v1 = v0 + variance(pop.effect)
        sd = math.sqrt(v1 / p + v0 / (1.0 - p))
    else:
        raise ValueError(f"unknown estimator tag {tag!r}")
    if sd == 0.0:
        raise DegenerateVariance(f"{tag} has zero asymptotic variance under this population")
    return sd


def from_law_vector(vec) -> EffectDistribution:
    kind = KINDS[int(vec[0])]
    return EffectDistribution(kind, tuple(vec[1 : 1 + len(_PARAM_NAMES[kind])]))
