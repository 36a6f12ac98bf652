"""Pure-numpy cell kernels, vectorised across replications in row chunks."""

from __future__ import annotations

import numpy as np

from .. import rng as _rng
from ..distributions import from_law_vector, quantile

MAX_REDRAWS = 1000
_CHUNK_ELEMS = 1 << 21

ORACLE, DIM, SYNTHETIC = 0, 1, 2


def replication_keys(master_seed: int, n: int, reps: np.ndarray) -> np.ndarray:
    """Vectorised ``rng.replication_seed`` over an array of replication indices."""
    h = _rng.mix64((master_seed ^ _rng.SEED_SALT) + _rng.GOLDEN)
    h = _rng.mix64(h + n * _rng.N_STEP)
    reps = np.asarray(reps, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _rng._mix64_array(np.uint64(h) + reps * np.uint64(_rng.GOLDEN))


def _unit_uniforms(keys, n, slot):
    counters = 3 * np.arange(n, dtype=np.uint64) + np.uint64(slot)
    return _rng.uniforms(keys[:, None], counters[None, :])


def _dim_rows(keys, n, base, eff, p_assign):
    z = _unit_uniforms(keys, n, 0) < p_assign
    y0 = quantile(base, _unit_uniforms(keys, n, 1))
    tau = quantile(eff, _unit_uniforms(keys, n, 2))
    y = y0 + z * tau
    n1 = z.sum(axis=1)
    n0 = n - n1
    empty = (n1 == 0) | (n0 == 0)
    safe1 = np.maximum(n1, 1)
    safe0 = np.maximum(n0, 1)
    m1 = np.where(z, y, 0.0).sum(axis=1) / safe1
    m0 = np.where(z, 0.0, y).sum(axis=1) / safe0
    d1 = np.where(z, y - m1[:, None], 0.0)
    d0 = np.where(z, 0.0, y - m0[:, None])
    v1 = np.where(n1 > 1, (d1 * d1).sum(axis=1) / np.maximum(n1 - 1, 1), 0.0)
    v0 = np.where(n0 > 1, (d0 * d0).sum(axis=1) / np.maximum(n0 - 1, 1), 0.0)
    sig = np.sqrt(n * (v1 / safe1 + v0 / safe0))
    return m1 - m0, sig, empty


def _dim(master_seed, n, reps, base, eff, p_assign):
    theta = np.empty(reps.size)
    sig = np.empty(reps.size)
    discards = np.zeros(reps.size, dtype=np.int64)
    rows = max(1, _CHUNK_ELEMS // (3 * n))
    for s in range(0, reps.size, rows):
        sl = slice(s, s + rows)
        t, g, empty = _dim_rows(replication_keys(master_seed, n, reps[sl]), n, base, eff, p_assign)
        theta[sl], sig[sl] = t, g
        pending = np.flatnonzero(empty) + s
        attempt = 0
        while pending.size:
            attempt += 1
            if attempt > MAX_REDRAWS:
                raise RuntimeError(f"n={n}: no two-arm sample after {MAX_REDRAWS} redraws")
            discards[pending] += 1
            idx = [_rng.redraw_index(int(r), attempt) for r in reps[pending]]
            t, g, empty = _dim_rows(
                replication_keys(master_seed, n, np.array(idx, dtype=np.uint64)),
                n, base, eff, p_assign,
            )
            theta[pending], sig[pending] = t, g
            pending = pending[empty]
    return theta, sig, discards


def _oracle(master_seed, n, reps, eff):
    theta = np.empty(reps.size)
    sig = np.empty(reps.size)
    rows = max(1, _CHUNK_ELEMS // n)
    for s in range(0, reps.size, rows):
        sl = slice(s, s + rows)
        tau = quantile(eff, _unit_uniforms(replication_keys(master_seed, n, reps[sl]), n, 2))
        theta[sl] = tau.mean(axis=1)
        sig[sl] = tau.std(axis=1, ddof=1) if n > 1 else 0.0
    return theta, sig, np.zeros(reps.size, dtype=np.int64)


def _synthetic(master_seed, n, reps, sigma, mu, force_zero):
    if force_zero:
        z = np.zeros(reps.size)
    else:
        u = _rng.uniforms(replication_keys(master_seed, n, reps)[:, None], np.arange(2, dtype=np.uint64))
        z = _rng.box_muller(u[:, 0], u[:, 1])
    theta = mu + sigma * z / np.sqrt(n)
    return theta, np.full(reps.size, sigma), np.zeros(reps.size, dtype=np.int64)


def cell_estimates(code, base_law, eff_law, p_assign, sigma, mu, n, master_seed,
                   rep_start, rep_stop, force_zero=False):
    """(theta_hat, sigma_hat, discards) for replications rep_start .. rep_stop - 1."""
    master_seed = int(master_seed)
    reps = np.arange(rep_start, rep_stop, dtype=np.uint64)
    if code == SYNTHETIC:
        return _synthetic(master_seed, n, reps, sigma, mu, force_zero)
    eff = from_law_vector(eff_law)
    if code == ORACLE:
        return _oracle(master_seed, n, reps, eff)
    return _dim(master_seed, n, reps, from_law_vector(base_law), eff, p_assign)
