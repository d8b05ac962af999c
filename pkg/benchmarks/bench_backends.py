"""Compare the compiled fixed-point kernel against the pure-Python fallback.

Times the dominant workload (iterated solves at a low alpha, where the
share term forces many iterations) on one synthetic season, verifies both
backends return bit-identical values, and reports the speedup.

Usage: python3 benchmarks/bench_backends.py [--teams N] [--riders N]
       [--races N] [--repeats N]
"""

from __future__ import annotations

import argparse
import time

from velorank import _kernels
from velorank.solver import Config, solve
from velorank.sweep import run_sweep
from velorank.synth import SynthSpec, generate


def best_of(repeats: int, fn) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--teams", type=int, default=18)
    parser.add_argument("--riders", type=int, default=28)
    parser.add_argument("--races", type=int, default=60)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; nothing to compare "
              "(pip install -e . rebuilds it)")
        return 1

    season = generate(SynthSpec(teams=args.teams, riders_per_team=args.riders,
                                races=args.races, seed=7))
    sweep_season = generate(SynthSpec(teams=4, riders_per_team=8,
                                      races=20, seed=7))
    config = Config(alpha=0.1, beta=1.0)

    print(f"season: {args.teams} teams x {args.riders} riders x {args.races} races")
    print(f"{'workload':<31} {'python':>10} {'cython':>10} {'speedup':>9}")

    rows = [
        ("solve (alpha=0.1, beta=1)",
         lambda b: solve(season, config, backend=b)),
        ("default-grid sweep (121 cells)",
         lambda b: run_sweep(sweep_season, backend=b)),
    ]
    for label, fn in rows:
        t_py = best_of(args.repeats, lambda: fn("python"))
        t_cy = best_of(args.repeats, lambda: fn("cython"))
        print(f"{label:<31} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>8.1f}x")

    a = solve(season, config, backend="python")
    b = solve(season, config, backend="cython")
    identical = a.values == b.values and a.iterations_by_team == b.iterations_by_team
    print(f"results bit-identical: {identical}")
    return 0 if identical else 1


if __name__ == "__main__":
    raise SystemExit(main())
