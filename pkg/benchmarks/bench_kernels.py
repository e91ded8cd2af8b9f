"""Numba vs numpy timings for the elementwise AVF kernels and a full step.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 20]

The kernel timings call both backends directly. The end-to-end timing runs
the sine-Gordon preset in two subprocesses, one with AVFLAB_DISABLE_NUMBA=1,
since the backend is fixed at import time.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from avflab import kernels
from avflab.terms import gauss_points

STEP_SNIPPET = """
import time
from avflab import build_problem, default_spec, initial_condition, integrate, kernels
spec = default_spec("SineGordonFd")
system = build_problem(spec)
u0 = initial_condition(spec, system)
integrate(system, u0, "avf", 0.01, 5)  # warm-up, includes any jit compile
t = time.perf_counter()
integrate(system, u0, "avf", 0.01, {steps})
print(kernels.BACKEND, (time.perf_counter() - t) / {steps})
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(n, repeat):
    rng = np.random.default_rng(0)
    a, b = rng.uniform(-3, 3, (2, n))
    b[::7] = a[::7] + 1e-12  # exercise the series branch too
    nodes, weights = gauss_points(3)
    dco = np.array([0.0, 0.0, 0.0, 1.0, 0.5])
    d2co = np.array([0.0, 0.0, 3.0, 2.0])
    cases = {
        "trig_dq": lambda impl: impl.trig_dq(a, b),
        "trig_dq_db": lambda impl: impl.trig_dq_db(a, b),
        "poly_average": lambda impl: impl.poly_average(a, b, dco, d2co, nodes, weights),
    }
    impls = {"numpy": kernels.numpy_impl}
    if kernels.numba_impl is not None:
        impls["numba"] = kernels.numba_impl
    print(f"kernels, n={n}, best of {repeat}")
    for name, call in cases.items():
        times = {}
        for label, impl in impls.items():
            call(impl)  # compile / warm caches
            times[label] = best_of(lambda: call(impl), repeat)
        row = "  ".join(f"{k}={v * 1e3:8.3f} ms" for k, v in times.items())
        speedup = f"  speedup={times['numpy'] / times['numba']:.2f}x" if "numba" in times else ""
        print(f"  {name:<13}{row}{speedup}")


def bench_step(steps):
    print(f"sine-Gordon FD N=200, mean seconds per AVF step over {steps} steps")
    for flag in ("1", "0"):
        env = dict(os.environ, AVFLAB_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", STEP_SNIPPET.format(steps=steps)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<6} {float(out[1]) * 1e3:8.3f} ms")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--steps", type=int, default=200)
    args = p.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    bench_kernels(args.n, args.repeat)
    bench_step(args.steps)


if __name__ == "__main__":
    main()
