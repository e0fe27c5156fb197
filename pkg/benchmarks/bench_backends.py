#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs the three hot kernels on identical inputs through both backends,
checks they agree, and prints timings:

    python benchmarks/bench_backends.py          # full sizes
    python benchmarks/bench_backends.py --quick  # smaller sizes

The flow benchmark exercises the numeric implicit-midpoint path on a
catalog system whose field is genuinely curved (the sphere x-axis spin),
which is where the per-point Newton loop dominates.
"""

import argparse
import time

import numpy as np

import toricost as tc
from toricost import kernels
from toricost.dynamics import IntegratorConfig, flow_component


def timed(fn, repeats=3):
    best = np.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return result, best


def _near_polar_orbit(pts):
    # orbits of the x-axis spin reach height sqrt(1 - x^2); keep |x| away
    # from zero so no trajectory grazes a chart pole
    x = np.sqrt(1.0 - pts[..., 1] ** 2) * np.cos(pts[..., 0])
    return np.abs(x) < 0.4


def bench_flow(n_points, flow_time):
    system = tc.build("s2-xspin")
    pts = tc.sample_points(system.chart, n_points, seed=1,
                           reject=_near_polar_orbit)
    cfg = IntegratorConfig(step_size=1e-3)

    def run():
        return flow_component(system, 0, flow_time, pts, cfg,
                              force_numeric=True)

    tc.force_backend("numba")
    run()  # compile before timing
    fast, t_fast = timed(run)
    tc.force_backend("numpy")
    slow, t_slow = timed(run, repeats=1)
    tc.force_backend(None)
    agree = float(np.abs(fast - slow).max())
    return ("midpoint flow", f"{n_points} pts x {flow_time:g}s flow",
            t_fast, t_slow, agree)


def bench_monge(m, instances):
    rng = np.random.default_rng(2)
    mats = [np.ascontiguousarray(rng.uniform(size=(m, m))) for _ in range(instances)]
    numba_mb = kernels.numba_impl().monge_bruteforce
    numpy_mb = kernels.numpy_impl().monge_bruteforce
    numba_mb(mats[0])  # compile

    def run(fn):
        return [fn(c)[0] for c in mats]

    fast, t_fast = timed(lambda: run(numba_mb))
    slow, t_slow = timed(lambda: run(numpy_mb), repeats=1)
    agree = float(np.abs(np.array(fast) - np.array(slow)).max())
    return ("monge brute force", f"{instances} instances, m={m}",
            t_fast, t_slow, agree)


def bench_sinkhorn(m, iters):
    rng = np.random.default_rng(3)
    cost = np.ascontiguousarray(rng.uniform(size=(m, m)))
    a = np.full(m, 1.0 / m)
    b = np.full(m, 1.0 / m)
    eps = 0.02 * float(cost.mean())
    numba_sk = kernels.numba_impl().sinkhorn_log
    numpy_sk = kernels.numpy_impl().sinkhorn_log
    numba_sk(cost, a, b, eps, 0.0, 10)  # compile

    fast, t_fast = timed(lambda: numba_sk(cost, a, b, eps, 0.0, iters))
    slow, t_slow = timed(lambda: numpy_sk(cost, a, b, eps, 0.0, iters),
                         repeats=1)
    agree = float(np.abs(fast[0] - slow[0]).max())
    return ("sinkhorn (log domain)", f"m={m}, {iters} iterations",
            t_fast, t_slow, agree)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()

    if kernels._try_load_numba() is None:
        raise SystemExit("numba is not importable; nothing to compare")

    if args.quick:
        rows = [bench_flow(2000, 0.5), bench_monge(7, 50),
                bench_sinkhorn(32, 2000)]
    else:
        rows = [bench_flow(20000, 1.0), bench_monge(9, 20),
                bench_sinkhorn(64, 20000)]

    header = f"{'kernel':<22} {'size':<28} {'numba':>9} {'numpy':>9} " \
             f"{'speedup':>8} {'max diff':>10}"
    print(header)
    print("-" * len(header))
    for name, size, t_fast, t_slow, agree in rows:
        print(f"{name:<22} {size:<28} {t_fast:>8.3f}s {t_slow:>8.3f}s "
              f"{t_slow / t_fast:>7.1f}x {agree:>10.2e}")


if __name__ == "__main__":
    main()
