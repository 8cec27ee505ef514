#!/usr/bin/env python3
"""Throughput benchmark: compiled tape kernel vs pure-Python fallback.

Times the hot path (potential, gradient and Hessian tapes evaluated over
a batch of points) on both backends and checks that the outputs are
bitwise identical.

Usage: python3 benchmarks/bench_eval.py [--points N] [--repeats R]
"""

import argparse
import time

import numpy as np

from gtdkit import kerr_newman, reissner_nordstrom_d
from gtdkit.kernel import available_backends, run_program_many


def collect_programs(system):
    progs = [("value", system.compiled.value)]
    for v, p in zip(system.variables, system.compiled.grads):
        progs.append((f"d/d{v}", p))
    for i, vi in enumerate(system.variables):
        for j, vj in enumerate(system.variables):
            if j >= i:
                progs.append((f"d2/d{vi}d{vj}", system.compiled.hess[i][j]))
    return progs


def bench_backend(impl, progs, pts, repeats):
    best = float("inf")
    outputs = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        outputs = [run_program_many(p, pts, impl=impl)[0] for _, p in progs]
        best = min(best, time.perf_counter() - t0)
    total_evals = len(progs) * pts.shape[0]
    return best, total_evals, outputs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=50_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled backend not available; showing pure-Python timings only")

    rng = np.random.default_rng(0)
    systems = [kerr_newman(), reissner_nordstrom_d(5)]

    print(f"{args.points} points per tape, best of {args.repeats} runs\n")
    header = f"{'system':<24} {'tapes':>5} {'backend':>9} {'time [s]':>10} {'Meval/s':>9} {'speedup':>8}"
    print(header)
    print("-" * len(header))

    for system in systems:
        progs = collect_programs(system)
        n = len(system.variables)
        pts = rng.uniform(0.5, 2.0, size=(args.points, n))
        results = {}
        for name in ("pure", "compiled"):
            impl = backends.get(name)
            if impl is None:
                continue
            elapsed, evals, outputs = bench_backend(impl, progs, pts, args.repeats)
            results[name] = (elapsed, evals, outputs)
            speed = evals / elapsed / 1e6
            speedup = ""
            if name == "compiled" and "pure" in results:
                speedup = f"{results['pure'][0] / elapsed:8.1f}x"
            print(
                f"{system.name:<24} {len(progs):>5} {name:>9} {elapsed:>10.4f} "
                f"{speed:>9.2f} {speedup:>8}"
            )
        if "compiled" in results and "pure" in results:
            for (_, a), (_, b) in zip(
                enumerate(results["pure"][2]), enumerate(results["compiled"][2])
            ):
                assert np.array_equal(a.view(np.uint64), b.view(np.uint64))
            print(f"{'':<24} bitwise identical across backends: yes")
        print()


if __name__ == "__main__":
    main()
