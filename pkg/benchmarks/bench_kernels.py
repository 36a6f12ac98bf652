"""Time the numba and pure-numpy cell kernels on the same workloads.

    python benchmarks/bench_kernels.py [--repeat 3]

Each workload is run once untimed on each backend (JIT compile / cache load),
then timed; the table reports the best of --repeat runs and checks that both
backends produce the same estimates to 1e-12.
"""

import argparse
import time

import numpy as np

from supereff import _kernels
from supereff.distributions import EffectDistribution as E

BASE = E.uniform(0, 1).law_vector()
TWO_POINT = E.two_point(0, 2, 0.5).law_vector()
BETA = E.scaled_beta(2, 3, 0, 1).law_vector()

WORKLOADS = [
    ("synthetic n=8 R=200k", (2, BASE, TWO_POINT, 0.5, 1.0, 1.0, 8, 1, 0, 200_000)),
    ("oracle mean n=1000 R=5k", (0, BASE, TWO_POINT, 0.5, 0.0, 1.0, 1000, 1, 0, 5_000)),
    ("diff-in-means n=4000 R=2k", (1, BASE, TWO_POINT, 0.5, 0.0, 1.0, 4000, 1, 0, 2_000)),
    ("diff-in-means n=25 R=20k", (1, BASE, TWO_POINT, 0.5, 0.0, 1.0, 25, 1, 0, 20_000)),
    ("diff-in-means beta n=50 R=500", (1, BASE, BETA, 0.5, 0.0, 0.4, 50, 1, 0, 500)),
]


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = sorted(_kernels.BACKENDS)
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup  agree")
    for name, wargs in WORKLOADS:
        results = {}
        for b in backends:
            fn = _kernels.BACKENDS[b]
            fn(*wargs[:-1], min(wargs[-1], 10))
            results[b] = best_of(fn, wargs, args.repeat)
        line = f"{name:32s}" + "".join(f"{results[b][0]:11.3f}s" for b in backends)
        if len(backends) == 2:
            speed = results["numpy"][0] / results["numba"][0]
            agree = np.allclose(results["numpy"][1][0], results["numba"][1][0], rtol=0, atol=1e-12)
            line += f"   {speed:6.1f}x  {agree}"
        print(line)


if __name__ == "__main__":
    main()
