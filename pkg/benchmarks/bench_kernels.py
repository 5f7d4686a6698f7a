"""Compare the compiled and NumPy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 513 2049] [--repeat 200]

Prints per-call times for each kernel and the time per full sixth-order step
with each backend (the latter runs in subprocesses, since the backend is
chosen at import time via ``KGEWI_PURE_PYTHON``).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from kgewi import _pykernels

try:
    from kgewi import _ckernels
except ImportError:
    _ckernels = None

STEP_SNIPPET = """
import time, warnings
warnings.simplefilter("ignore")
from kgewi import BACKEND, KGEProblem, build_grid, integrate
g = build_grid(-32, 32, {M})
p = KGEProblem.gaussian_benchmark(0.05)
integrate(p, g, 1e-4, 1e-3, 6)
t = time.perf_counter()
integrate(p, g, 1e-4, {n} * 1e-4, 6)
print(BACKEND, (time.perf_counter() - t) / {n})
"""


def kernel_calls(K, rng):
    """``{label: f(module)}`` closures over fresh random inputs of length ``K``."""
    def cplx(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    real = [rng.standard_normal(K) for _ in range(8)]
    out_r, out_c = np.empty(K), np.empty(K, complex)
    w2, uh, fh = rng.uniform(1, 10, K), cplx(K), cplx(K)
    u, d, v = cplx(K), cplx(K), cplx(K)
    gap, wsin2 = rng.uniform(0, 4, K), rng.standard_normal(K)
    A, Adot, F = rng.standard_normal((3, K)), rng.standard_normal((3, K)), cplx(3, K)
    return {
        "chain_term(m=4)": lambda mod: mod.chain_term(4, *real, out_r),
        "accel": lambda mod: mod.accel(w2, uh, fh, 4.0, out_c),
        "main_update(3 terms)": lambda mod: mod.main_update(u, d, v, gap, wsin2, A, Adot, F),
    }


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    mods = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels is not None else [])
    print(f"{'kernel':<22}{'K':>7}" + "".join(f"{name + ' [us]':>16}" for name, _ in mods) + f"{'speedup':>10}")
    for K in sizes:
        for name, call in kernel_calls(K, rng).items():
            times = [min(timeit.repeat(lambda: call(mod), number=repeat, repeat=3)) / repeat * 1e6
                     for _, mod in mods]
            speed = f"{times[0] / times[1]:>10.2f}" if len(times) == 2 else ""
            print(f"{name:<22}{K:>7}" + "".join(f"{t:>16.2f}" for t in times) + speed)


def bench_steps(M, n):
    print(f"\nsixth-order step, M = {M}")
    for flag in ("1", "0"):
        env = dict(os.environ, KGEWI_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", STEP_SNIPPET.format(M=M, n=n)], env=env,
                             capture_output=True, text=True, check=True)
        backend, secs = res.stdout.split()
        print(f"  {backend:<8}{float(secs) * 1e6:10.1f} us/step")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[129, 513, 2049])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--M", type=int, default=1024)
    ap.add_argument("--steps", type=int, default=500)
    args = ap.parse_args(argv)
    bench_kernels(args.sizes, args.repeat)
    bench_steps(args.M, args.steps)


if __name__ == "__main__":
    main()
