"""Compare the compiled and pure-Python RK4 backends.

    python benchmarks/bench_kernels.py [--max-time 200] [--repeat 3]

Both backends integrate the same seeds; the script checks that their
trajectories agree bit for bit before reporting timings.
"""

import argparse
import time

import numpy as np

from pdcontext import kernels
from pdcontext.atlas import simplex_seeds
from pdcontext.game_model import GameParams
from pdcontext.replicator import IntegrationConfig, integrate

CASES = [
    ("reduced3", GameParams(z=2.5, beta=0.75), 3),
    ("reduced4", GameParams(z=2.5, beta=0.9), 4),
    ("general", GameParams(z=2.5, beta=0.75), 3),
]


def _seeds(field, n):
    seeds = simplex_seeds(n, 3)
    if field == "general":
        return [np.append(s, 1.0 - s.sum()) for s in seeds]
    return seeds


def run_case(field, params, n, backend, cfg):
    out = []
    start = time.perf_counter()
    for seed in _seeds(field, n):
        out.append(integrate(seed, field, cfg, params, backend=backend))
    return time.perf_counter() - start, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-time", type=float, default=200.0)
    ap.add_argument("--step", type=float, default=1e-2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "cython" not in kernels.BACKENDS:
        raise SystemExit("compiled backend not built; run `pip install -e . --no-build-isolation` first")
    cfg = IntegrationConfig(step=args.step, max_time=args.max_time, conv_tol=1e-300)

    print(f"{'field':10s} {'steps':>9s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for field, params, n in CASES:
        best = {}
        results = {}
        for backend in ("python", "cython"):
            times = []
            for _ in range(args.repeat):
                dt, res = run_case(field, params, n, backend, cfg)
                times.append(dt)
            best[backend] = min(times)
            results[backend] = res
        for a, b in zip(results["python"], results["cython"]):
            if not np.array_equal(a.points, b.points):
                raise SystemExit(f"{field}: backends disagree")
        steps = sum(len(t.times) - 1 for t in results["cython"])
        print(
            f"{field:10s} {steps:9d} {best['python']:11.3f} {best['cython']:11.4f} "
            f"{best['python'] / best['cython']:7.1f}x"
        )


if __name__ == "__main__":
    main()
