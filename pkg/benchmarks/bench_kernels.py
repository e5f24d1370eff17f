"""Compiled versus numpy kernels on synthetic Poisson streams.

    python benchmarks/bench_kernels.py [--tags 1e6] [--repeat 3]
"""

import argparse
import time

import numpy as np

from pairlab import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--tags", type=float, default=1e6, help="events per channel")
    p.add_argument("--rate", type=float, default=1e6, help="events per second per channel")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    n = int(args.tags)
    span = int(n / args.rate * 1e12)
    rng = np.random.default_rng(0)
    a = np.sort(rng.integers(0, span, n))
    b = np.sort(rng.integers(0, span, n))
    dead = np.sort(rng.integers(0, span // 20, n))  # dense enough for dead time to bite

    jobs = {
        "lag_histogram": lambda m: m.lag_histogram(a, b, 61 * 162, 162, 122),
        "greedy_coincidences": lambda m: m.greedy_coincidences(a, b, -4000, 4000),
        "dead_time_mask": lambda m: m.dead_time_mask(dead, 22_000),
    }
    backends = kernels.available_backends()
    print(f"{n} tags per channel, {args.rate:g}/s; selected backend: {kernels.BACKEND}")
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for job, fn in jobs.items():
        t = {name: best_of(lambda: fn(mod), args.repeat) for name, mod in backends.items()}
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{job:<22}" + "".join(f"{t[name]:>11.3f}s" for name in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
