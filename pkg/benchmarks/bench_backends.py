#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel backends on the hot paths.

Runs itself twice as a subprocess with PB_EXTREMAL_BACKEND set, times the
same workloads in each, and prints a side-by-side table.  JIT compilation
is excluded: every workload is executed once before the timed repetitions.

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --starts 200 --conv-n 4000
"""

import argparse
import json
import os
import subprocess
import sys
import time


def best_of(reps, fn):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_workloads(args):
    import numpy as np

    import pbextremal as pbx
    from pbextremal import _kernels
    from pbextremal.oracle import OracleConfig, oracle_optimize

    rng = np.random.default_rng(0)
    results = {}

    p_big = rng.random(args.conv_n)
    _kernels.convolve_bernoulli(p_big[:4])  # warm
    results[f"pmf convolution (n={args.conv_n})"] = best_of(
        args.reps, lambda: _kernels.convolve_bernoulli(p_big)
    )

    mults = np.array([2.0, 1.0])
    d = np.array([1.4, 0.82])
    _kernels.newton_block_scan(mults, d, 4, 1e-13, 1e-10, 200, 40)  # warm
    results["block Newton multistart (12^2 grid)"] = best_of(
        args.reps, lambda: _kernels.newton_block_scan(mults, d, 12, 1e-13, 1e-10, 200, 40)
    )

    n = 5
    g = rng.uniform(-1, 1, n + 1)
    s = pbx.power_sums(rng.random(n), 2)
    cfg_warm = OracleConfig(n_starts=2, seed=1)
    oracle_optimize(n, g, s, "max", cfg_warm)  # warm
    cfg = OracleConfig(n_starts=args.starts, seed=1)
    results[f"oracle instance (n=5, r=2, {args.starts} starts)"] = best_of(
        max(1, args.reps // 4), lambda: oracle_optimize(n, g, s, "max", cfg)
    )

    kap = pbx.power_sums_to_cumulants(s)
    req = pbx.SolveRequest(n=n, g=pbx.Payoff(g),
                           spec=pbx.CumulantSpec(r=2, c=tuple(kap)), direction="max")
    pbx.solve_extremal(req)  # warm
    results["structured solve (n=5, r=2)"] = best_of(
        args.reps, lambda: pbx.solve_extremal(req)
    )

    return pbx.BACKEND, results


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--conv-n", type=int, default=2000)
    parser.add_argument("--starts", type=int, default=40)
    parser.add_argument("--reps", type=int, default=8)
    parser.add_argument("--worker", choices=["numba", "numpy"], help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        backend, results = run_workloads(args)
        print(json.dumps({"backend": backend, "results": results}))
        return

    reports = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, PB_EXTREMAL_BACKEND=backend)
        cmd = [sys.executable, os.path.abspath(__file__), "--worker", backend,
               "--conv-n", str(args.conv_n), "--starts", str(args.starts),
               "--reps", str(args.reps)]
        print(f"running {backend} backend ...", file=sys.stderr)
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        payload = json.loads(out.stdout.strip().splitlines()[-1])
        if payload["backend"] != backend:
            print(f"warning: requested {backend}, got {payload['backend']} "
                  "(numba missing?)", file=sys.stderr)
        reports[backend] = payload["results"]

    names = list(reports["numba"])
    width = max(len(n) for n in names)
    print(f"{'workload':<{width}}  {'numba':>12}  {'numpy':>12}  {'speedup':>8}")
    for name in names:
        tn = reports["numba"][name]
        tp = reports["numpy"][name]
        print(f"{name:<{width}}  {tn * 1e3:>10.3f}ms  {tp * 1e3:>10.3f}ms  {tp / tn:>7.1f}x")


if __name__ == "__main__":
    main()
