"""Counter-based random streams built on the splitmix64 finalizer.

Every replication gets its own 64-bit stream key from ``replication_seed``;
the k-th raw word of a stream is ``mix64(key + (k + 1) * GOLDEN)``. Nothing
is carried between draws except the counter, so any replication can be
regenerated in isolation, in any order, on any worker.

Counter layout used by samplers and the simulation kernels (unit i of a
sample): treatment uniform at 3i, baseline uniform at 3i + 1, effect uniform
at 3i + 2. The synthetic-normal estimator reads counters 0 and 1 of a fresh
stream.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
N_STEP = 0xD1B54A32D192ED03
SEED_SALT = 0x243F6A8885A308D3
MIX_M1 = 0xBF58476D1CE4E5B9
MIX_M2 = 0x94D049BB133111EB

# reps must stay below 2**40 so redraw keys never alias primary keys
REDRAW_BIT = 1 << 63
REDRAW_SHIFT = 40

_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_M1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_M2) & MASK64
    return z ^ (z >> 31)


def replication_seed(master_seed: int, n: int, rep: int) -> int:
    """Stream key for replication ``rep`` of the cell with sample size ``n``.

    Each stage is a bijection of the running state, so for a fixed
    (master_seed, n) distinct reps can never collide.
    """
    h = mix64((master_seed ^ SEED_SALT) + GOLDEN)
    h = mix64(h + n * N_STEP)
    return mix64(h + rep * GOLDEN)


def redraw_index(rep: int, attempt: int) -> int:
    """Replication index used for the ``attempt``-th redraw of ``rep`` (attempt >= 1)."""
    return REDRAW_BIT | (attempt << REDRAW_SHIFT) | rep


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_M2)
    return z ^ (z >> np.uint64(31))


def raw_words(key, counters: np.ndarray) -> np.ndarray:
    """Raw 64-bit words at the given counters; ``key`` may be a scalar or broadcastable array."""
    key = np.asarray(key, dtype=np.uint64)
    c = np.asarray(counters, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        return _mix64_array(key + c * np.uint64(GOLDEN))


def uniforms(key, counters: np.ndarray) -> np.ndarray:
    """Doubles in [0, 1) with 53 random bits."""
    return (raw_words(key, counters) >> np.uint64(11)).astype(np.float64) * _INV_2_53


class RandomStream:
    """Sequential view over one counter-based stream.

    The cursor only advances; ``at`` jumps to an absolute counter.
    """

    __slots__ = ("key", "cursor")

    def __init__(self, key: int, cursor: int = 0):
        self.key = key & MASK64
        self.cursor = cursor

    @classmethod
    def for_replication(cls, master_seed: int, n: int, rep: int) -> "RandomStream":
        return cls(replication_seed(master_seed, n, rep))

    def at(self, cursor: int) -> "RandomStream":
        return RandomStream(self.key, cursor)

    def uniform(self, size: int | None = None):
        count = 1 if size is None else int(size)
        out = uniforms(self.key, np.arange(self.cursor, self.cursor + count, dtype=np.uint64))
        self.cursor += count
        return float(out[0]) if size is None else out

    def standard_normal(self) -> float:
        """One N(0, 1) draw by Box-Muller from two consecutive counters."""
        u1, u2 = self.uniform(2)
        return float(box_muller(u1, u2))


def box_muller(u1, u2):
    """Cosine branch of Box-Muller; u1 in [0, 1) is reflected to (0, 1]."""
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
