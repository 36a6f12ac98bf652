import numpy as np
import pytest

from supereff import rng
from supereff._kernels import _numba, _numpy
from supereff.rng import RandomStream, replication_seed


def test_seed_deterministic():
    assert replication_seed(7, 100, 3) == replication_seed(7, 100, 3)


def test_seed_collision_scan():
    seeds = {replication_seed(s, n, r) for s in (0, 1) for n in (1, 4, 9, 16, 250) for r in range(10_000)}
    assert len(seeds) == 2 * 5 * 10_000


def test_adjacent_reps_differ():
    for rep in range(1000):
        assert replication_seed(42, 8, rep) != replication_seed(42, 8, rep + 1)


def test_avalanche():
    # flipping one input bit of rep should flip about half the output bits
    flips = []
    for rep in range(2000):
        for bit in range(0, 40, 3):
            a = replication_seed(99, 10, rep)
            b = replication_seed(99, 10, rep ^ (1 << bit))
            flips.append(bin(a ^ b).count("1"))
    assert np.mean(flips) == pytest.approx(32.0, abs=0.5)


def test_redraw_index_disjoint():
    assert rng.redraw_index(5, 1) != 5
    assert rng.redraw_index(5, 1) >= 2**63
    assert rng.redraw_index(5, 1) != rng.redraw_index(5, 2)


def test_vectorised_keys_match_scalar():
    reps = np.arange(0, 500, dtype=np.uint64)
    for master in (0, 1, 2**64 - 1, 123456789):
        keys = _numpy.replication_keys(master, 37, reps)
        assert [int(k) for k in keys] == [replication_seed(master, 37, int(r)) for r in reps]


def test_numba_prefix_matches_python():
    master, n = 2**63 + 17, 250
    prefix = int(_numba.cell_prefix(np.uint64(master), np.uint64(n)))
    key = rng.mix64(prefix + 11 * rng.GOLDEN)
    assert key == replication_seed(master, n, 11)


def test_stream_cursor_and_range():
    s = RandomStream(12345)
    a = s.uniform(10)
    b = s.uniform(5)
    whole = RandomStream(12345).uniform(15)
    np.testing.assert_array_equal(np.concatenate([a, b]), whole)
    assert s.cursor == 15
    big = RandomStream(1).uniform(100_000)
    assert big.min() >= 0.0 and big.max() < 1.0
    assert abs(big.mean() - 0.5) < 4 * np.sqrt(1 / 12 / 100_000)


def test_standard_normal_moments():
    z = np.array([RandomStream(replication_seed(3, 1, r)).standard_normal() for r in range(20_000)])
    assert abs(z.mean()) < 4 / np.sqrt(z.size)
    assert abs(z.var() - 1.0) < 4 * np.sqrt(2 / z.size)
