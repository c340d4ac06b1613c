"""Compiled vs numpy kernels: Euler oracle stepping and spectral sums.

    python benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import timeit

import numpy as np

from superradiance import _kernels_py, oracle
from superradiance._backend import COMPILED, kernels
from superradiance.core import SystemParams, basis_state


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not COMPILED:
        raise SystemExit("compiled extension not available; build with pip install -e . --no-build-isolation")

    params = SystemParams(gamma1=0.9, gamma2=1.1, gamma_d=8.0, beta=0.8, delta=1.1, gamma_p=0.01)
    heff, idx, coef = oracle._euler_setup(params, with_pump=True)
    rho0 = np.ascontiguousarray(basis_state("e1g2"))
    checkpoints = np.array([args.steps], dtype=np.int64)
    dt = oracle.max_step(params, with_pump=True)

    rng = np.random.default_rng(0)
    w = rng.normal(size=16) + 1j * rng.normal(size=16)
    lam = -np.abs(rng.normal(size=16)) + 1j * rng.normal(size=16)
    t = np.linspace(0, 10, 20001)

    rows = []
    for name, call in (
        (f"euler_integrate ({args.steps} steps)", lambda k: k.euler_integrate(heff, idx, coef, rho0, dt, checkpoints)),
        (f"spectral_sum ({t.size} times)", lambda k: k.spectral_sum(w, lam, t)),
    ):
        fast = min(timeit.repeat(lambda: call(kernels), number=1, repeat=args.repeat))
        slow = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat))
        rows.append((name, fast, slow))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'compiled s':>11}  {'numpy s':>9}  speedup")
    for name, fast, slow in rows:
        print(f"{name:<{width}}  {fast:>11.4f}  {slow:>9.4f}  {slow / fast:>6.1f}x")


if __name__ == "__main__":
    main()
