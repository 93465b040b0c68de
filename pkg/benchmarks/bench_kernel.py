#!/usr/bin/env python3
"""Benchmark: compiled counting kernel against the pure-Python fallback.

Microbenchmarks run both kernel modules in-process; the end-to-end counter
comparison re-launches the interpreter with SAPPROX_KERNEL forced, since the
kernel is selected at import time.

Usage:
    python benchmarks/bench_kernel.py [--quick]
"""

import argparse
import os
import random
import subprocess
import sys
import time

from sapprox._kernel import implementations

END_TO_END = """
import time
from fractions import Fraction
from sapprox import _kernel
from sapprox.approx import psi_one
from sapprox.counting import CountRequest, count_solutions
from sapprox.sampler import SamplerConfig, sample_matrix
from sapprox.sring import NormProfile, PlaceSet

S = PlaceSet((2,))
cfg = SamplerConfig.of(424242, (2, 1), S, {2: 24})
req = CountRequest(S, sample_matrix(cfg), psi_one(S, 2, 1),
                   NormProfile.of(Fraction(REAL_T), {2: 5}))
start = time.perf_counter()
n = count_solutions(req)
elapsed = time.perf_counter() - start
print(f"{_kernel.implementation_name()} {n} {elapsed:.3f}")
"""


def bench_micro(impl, workload):
    start = time.perf_counter()
    total = 0
    for cn, cd, vn, vd, e, r, M in workload:
        total += impl.count_ap_abs_root(cn, cd, vn, vd, e, r, M)
    elapsed = time.perf_counter() - start
    return total, elapsed


def bench_valuation(impl, ns):
    start = time.perf_counter()
    acc = 0
    for v in ns:
        acc += impl.valuation(v, 2) + impl.valuation(v, 3)
    return acc, time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()
    rounds = 20_000 if args.quick else 200_000
    real_t = 64 if args.quick else 512

    impls = implementations()
    if len(impls) < 2:
        print("compiled kernel not built; only the pure fallback is available")

    rng = random.Random(7)
    workload = [
        (
            rng.randint(-(10**12), 10**12),
            rng.randint(1, 10**6),
            rng.randint(0, 10**14),
            rng.randint(1, 10**6),
            rng.randint(1, 4),
            rng.randint(-(10**6), 10**6),
            rng.randint(1, 10**6),
        )
        for _ in range(rounds)
    ]
    numbers = [rng.randint(1, 10**12) * 6 for _ in range(rounds)]

    print(f"== microbenchmarks ({rounds} calls) ==")
    baseline = None
    for impl in impls:
        name = impl.__name__.rsplit("_", 1)[-1]
        total, dt = bench_micro(impl, workload)
        _, dt_val = bench_valuation(impl, numbers)
        speed = "" if baseline is None else f"  ({baseline / dt:.2f}x vs pure)"
        if baseline is None:
            baseline = dt
        print(f"count_ap_abs_root[{name}]: {dt:.3f}s checksum={total}{speed}")
        print(f"valuation        [{name}]: {dt_val:.3f}s")

    print(f"== end-to-end count_solutions (T_inf = {real_t}, T_2 = 32) ==")
    results = {}
    for mode in ("pure", "fast"):
        env = dict(os.environ, SAPPROX_KERNEL=mode)
        out = subprocess.run(
            [sys.executable, "-c", END_TO_END.replace("REAL_T", str(real_t))],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        ).stdout.split()
        results[out[0]] = (int(out[1]), float(out[2]))
        print(f"{out[0]}: count={out[1]} in {out[2]}s")
    if "fast" in results and "pure" in results:
        assert results["fast"][0] == results["pure"][0], "kernel results disagree!"
        print(f"speedup: {results['pure'][1] / results['fast'][1]:.2f}x")


if __name__ == "__main__":
    main()
