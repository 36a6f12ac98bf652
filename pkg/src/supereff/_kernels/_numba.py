"""Numba-compiled cell kernels; one replication per outer iteration, one scratch buffer per call."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .. import rng as _rng

U = np.uint64
_GOLDEN = U(_rng.GOLDEN)
_N_STEP = U(_rng.N_STEP)
_SALT = U(_rng.SEED_SALT)
_M1 = U(_rng.MIX_M1)
_M2 = U(_rng.MIX_M2)
_S11, _S27, _S30, _S31 = U(11), U(27), U(30), U(31)
_ONE = U(1)
_REDRAW_BIT = U(_rng.REDRAW_BIT)
_REDRAW_SHIFT = U(_rng.REDRAW_SHIFT)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi

MAX_REDRAWS = 1000
BETA_BISECT_STEPS = 60


@njit(inline="always", cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def cell_prefix(master_seed, n):
    h = _mix64((master_seed ^ _SALT) + _GOLDEN)
    return _mix64(h + n * _N_STEP)


@njit(inline="always", cache=True)
def _key(prefix, rep):
    return _mix64(prefix + rep * _GOLDEN)


@njit(inline="always", cache=True)
def _uniform(key, counter):
    return float(_mix64(key + (counter + _ONE) * _GOLDEN) >> _S11) * _INV_2_53


@njit(cache=True)
def _betacf(a, b, x):
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


@njit(cache=True)
def betainc(a, b, x):
    """Regularized incomplete beta I_x(a, b) by Lentz's continued fraction."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbt = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    bt = math.exp(lbt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


@njit(cache=True)
def quantile(law, u):
    code = int(law[0])
    if code == 0:
        return law[1]
    if code == 1:
        return law[2] if u < law[3] else law[1]
    if code == 2:
        return law[1] + (law[2] - law[1]) * u
    alpha, beta, lo, hi = law[1], law[2], law[3], law[4]
    left, right = 0.0, 1.0
    for _ in range(BETA_BISECT_STEPS):
        mid = 0.5 * (left + right)
        if betainc(alpha, beta, mid) < u:
            left = mid
        else:
            right = mid
    return lo + (hi - lo) * (0.5 * (left + right))


@njit(cache=True)
def _dim_one(key, n, base_law, eff_law, p_assign, ybuf, zbuf):
    n1 = 0
    s1 = 0.0
    s0 = 0.0
    for i in range(n):
        c = U(3 * i)
        z = _uniform(key, c) < p_assign
        y = quantile(base_law, _uniform(key, c + U(1)))
        if z:
            y += quantile(eff_law, _uniform(key, c + U(2)))
            s1 += y
            n1 += 1
        else:
            s0 += y
        ybuf[i] = y
        zbuf[i] = z
    n0 = n - n1
    if n1 == 0 or n0 == 0:
        return 0.0, 0.0, False
    m1 = s1 / n1
    m0 = s0 / n0
    q1 = 0.0
    q0 = 0.0
    for i in range(n):
        if zbuf[i]:
            q1 += (ybuf[i] - m1) ** 2
        else:
            q0 += (ybuf[i] - m0) ** 2
    v1 = q1 / (n1 - 1) if n1 > 1 else 0.0
    v0 = q0 / (n0 - 1) if n0 > 1 else 0.0
    return m1 - m0, math.sqrt(n * (v1 / n1 + v0 / n0)), True


@njit(cache=True, nogil=True)
def _cell_estimates(code, base_law, eff_law, p_assign, sigma, mu, n, master_seed,
                   rep_start, rep_stop, force_zero=False):
    count = rep_stop - rep_start
    theta = np.empty(count)
    sig = np.empty(count)
    discards = np.zeros(count, dtype=np.int64)
    prefix = cell_prefix(U(master_seed), U(n))
    root_n = math.sqrt(n)
    ybuf = np.empty(n)
    zbuf = np.empty(n, dtype=np.bool_)
    for j in range(count):
        rep = U(rep_start + j)
        key = _key(prefix, rep)
        if code == 2:
            zdraw = 0.0
            if not force_zero:
                u1 = _uniform(key, U(0))
                u2 = _uniform(key, U(1))
                zdraw = math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(_TWO_PI * u2)
            theta[j] = mu + sigma * zdraw / root_n
            sig[j] = sigma
        elif code == 0:
            total = 0.0
            for i in range(n):
                ybuf[i] = quantile(eff_law, _uniform(key, U(3 * i + 2)))
                total += ybuf[i]
            m = total / n
            ss = 0.0
            for i in range(n):
                ss += (ybuf[i] - m) ** 2
            theta[j] = m
            sig[j] = math.sqrt(ss / (n - 1)) if n > 1 else 0.0
        else:
            attempt = 0
            while True:
                est, sd, ok = _dim_one(key, n, base_law, eff_law, p_assign, ybuf, zbuf)
                if ok:
                    break
                attempt += 1
                if attempt > MAX_REDRAWS:
                    raise RuntimeError("no two-arm sample within the redraw budget")
                key = _key(prefix, _REDRAW_BIT | (U(attempt) << _REDRAW_SHIFT) | rep)
            theta[j] = est
            sig[j] = sd
            discards[j] = attempt
    return theta, sig, discards


def cell_estimates(code, base_law, eff_law, p_assign, sigma, mu, n, master_seed,
                   rep_start, rep_stop, force_zero=False):
    """(theta_hat, sigma_hat, discards) for replications rep_start .. rep_stop - 1."""
    return _cell_estimates(
        int(code), np.asarray(base_law, dtype=np.float64), np.asarray(eff_law, dtype=np.float64),
        float(p_assign), float(sigma), float(mu), int(n), U(int(master_seed)),
        int(rep_start), int(rep_stop), bool(force_zero),
    )
