"""Compare the numba and numpy backends of the hot kernels.

Kernel timings call both variants in one process; the end-to-end timings run
``decay-lab`` workloads in subprocesses with ``DECAYLAB_BACKEND`` set.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R] [--no-e2e]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from decaylab import derive_params, kernels
from decaylab._accel import _numba

SETUP = "from decaylab import *; p = derive_params()"
E2E = {
    "amplitude_direct(t=50)": "amplitude_direct(50.0, p)",
    "effective_width(t=0.02)": "effective_width(0.02, p)",
    "background_term(t=1e-3)": "background_term(1e-3, p)",
}


def kernel_cases(n):
    p = derive_params()
    rng = np.random.default_rng(0)
    u = np.sort(rng.uniform(-p.M, 1e5, n))
    y = rng.uniform(0.0, 3e4, n)
    s = rng.uniform(0.0, 60.0, n)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    a = p.args
    return {
        "spectral_offset": (lambda: kernels.spectral_offset_np(u, *a, 1), lambda: kernels.spectral_offset_nb(u, *a, 1)),
        "continued_density": (lambda: kernels.continued_density_np(-1j * y, *a),
                              lambda: kernels.continued_density_nb(-1j * y, *a)),
        "oscillate": (lambda: kernels.oscillate_np(v, u, 3.0), lambda: kernels.oscillate_nb(v, u, 3.0)),
        "background_integrand": (lambda: kernels.background_integrand_np(s, 1e-3, 0, *a),
                                 lambda: kernels.background_integrand_nb(s, 1e-3, 0, *a)),
    }


def best(fn, repeat):
    fn()  # warm-up / JIT
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def e2e(stmt, backend, repeat):
    env = dict(os.environ, DECAYLAB_BACKEND=backend)
    prog = (f"import timeit\n{SETUP}\n{stmt}\n"
            f"print(min(timeit.repeat(lambda: {stmt}, number=1, repeat={repeat})))")
    out = subprocess.run([sys.executable, "-c", prog], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1 << 18)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-e2e", action="store_true")
    args = ap.parse_args(argv)
    if _numba is None:
        sys.exit("numba is not installed; nothing to compare")
    print(f"{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, (f_np, f_nb) in kernel_cases(args.size).items():
        a, b = best(f_np, args.repeat), best(f_nb, args.repeat)
        print(f"{name:<24}{1e3 * a:12.2f}{1e3 * b:12.2f}{a / b:10.1f}")
    if args.no_e2e:
        return
    print(f"\n{'workload':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, code in E2E.items():
        a, b = e2e(code, "numpy", args.repeat), e2e(code, "numba", args.repeat)
        print(f"{name:<24}{1e3 * a:12.2f}{1e3 * b:12.2f}{a / b:10.1f}")


if __name__ == "__main__":
    main()
