"""Compare the numba and numpy kernel backends.

Run from the repository root:

    python benchmarks/bench_kernels.py            # kernel timings
    python benchmarks/bench_kernels.py --solve    # plus an end-to-end solve per backend

The end-to-end part starts a fresh interpreter per backend because the
backend is fixed at import time by ``MILDFLOW_BACKEND``.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from mildflow.kernels import implementations


def best_of(fn, args, repeat):
    fn(*args)  # warm-up (includes compilation for numba)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def make_cases(points, samples, rng):
    u = rng.standard_normal((samples, points))
    v = rng.standard_normal((samples, points))
    theta = rng.standard_normal((samples, points)) * 0.1
    kernel = rng.random((points, points)) / points
    weights = np.full(points, 1.0 / points)
    omega = rng.standard_normal((samples, 2, points))
    p = rng.standard_normal((samples, 2, points))
    beta_u = rng.random((samples, points))
    return {
        "nonlocal_positive_part": (kernel, weights, u, theta),
        "advective_negative_part": (omega, p, beta_u, 1.5),
        "autocatalytic": (u, v, 0.5, 0.5, 1.0, 1.0),
        "signed_power": (u, 0.5),
    }


SOLVE_SNIPPET = """
import time
from mildflow.scenarios import build_problem, load_scenario
from mildflow.solver import solve
from mildflow import BACKEND
cfg = load_scenario({path!r})
prob = build_problem(cfg)
solve(prob.op, prob.model, prob.u0, prob.solver_config)
t0 = time.perf_counter()
solve(prob.op, prob.model, prob.u0, prob.solver_config)
print(BACKEND, time.perf_counter() - t0)
"""


def bench_solve(path):
    for backend in ("numpy", "numba"):
        env = dict(os.environ, MILDFLOW_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(path=path)],
                             env=env, capture_output=True, text=True, check=True)
        name, secs = out.stdout.split()
        print(f"solve {os.path.basename(path):<28} {name:>6}: {float(secs) * 1e3:9.1f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=576, help="grid points (24x24 by default)")
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--solve", action="store_true")
    ap.add_argument("--scenario", default=os.path.join(os.path.dirname(__file__), "..", "scenarios",
                                                       "bushfire_smooth.toml"))
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    cases = make_cases(args.points, args.samples, rng)
    tables = {b: implementations(b) for b in ("numpy", "numba")}
    print(f"{'kernel':<26} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}  max |diff|")
    for name, fargs in cases.items():
        t_np = best_of(tables["numpy"][name], fargs, args.repeat)
        t_nb = best_of(tables["numba"][name], fargs, args.repeat)
        a = np.asarray(tables["numpy"][name](*fargs))
        b = np.asarray(tables["numba"][name](*fargs))
        print(f"{name:<26} {t_np * 1e3:11.3f} {t_nb * 1e3:11.3f} {t_np / t_nb:8.2f}  {np.max(np.abs(a - b)):.2e}")
    if args.solve:
        bench_solve(os.path.abspath(args.scenario))


if __name__ == "__main__":
    main()
