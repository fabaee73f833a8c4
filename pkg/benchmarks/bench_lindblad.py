"""Compare the compiled and numpy Lindblad kernels.

Times ``rk4_steps`` for both backends on a thermal state of the Ising
charger with dephasing and a thermal bath, and reports the largest entry
difference between their results.

Usage::

    python benchmarks/bench_lindblad.py --sizes 4 6 8 10 --steps 5
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from kicked_qb import _kernels
from kicked_qb.dense import DissipationChannels, build_hamiltonians, gibbs_state
from kicked_qb.thermal import SELF_DUAL, ThermalParams


def _time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(sizes, steps: int, repeat: int, dt: float = 1e-2) -> list[dict]:
    ch = DissipationChannels(gamma_z=0.01, gamma=0.01, beta=2.0)
    rows = []
    for n in sizes:
        ham = build_hamiltonians(n, SELF_DUAL, ThermalParams(0.5, 1.0, 2.0))
        rho = gibbs_state(ham.h_th, 2.0)
        h = ham.h_i
        args = (steps, dt, h.masks, h.coeffs.astype(float), h.diag.astype(float), n,
                ch.gamma_z, ch.gamma_plus, ch.gamma_minus, True)
        row = {"n_sites": n, "dim": 1 << n}
        results = {}
        for name, mod in (("python", _kernels.fallback), ("cython", _kernels.compiled)):
            if mod is None:
                row[name] = np.nan
                continue
            results[name] = mod.rk4_steps(rho, *args)
            row[name] = _time(lambda: mod.rk4_steps(rho, *args), repeat) / steps
        row["speedup"] = row["python"] / row["cython"]
        row["max_diff"] = (float(np.max(np.abs(results["python"] - results["cython"])))
                           if len(results) == 2 else np.nan)
        rows.append(row)
    return rows


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 6, 8, 10])
    parser.add_argument("--steps", type=int, default=5, help="RK4 steps per timing")
    parser.add_argument("--repeat", type=int, default=3, help="best of this many timings")
    args = parser.parse_args(argv)
    if _kernels.compiled is None:
        print("compiled extension not available; only the numpy backend is timed")
    print(f"{'N':>3} {'dim':>6} {'python s/step':>14} {'cython s/step':>14} {'speedup':>8} {'max diff':>10}")
    for r in run(args.sizes, args.steps, args.repeat):
        print(f"{r['n_sites']:>3} {r['dim']:>6} {r['python']:>14.4e} {r['cython']:>14.4e} "
              f"{r['speedup']:>8.2f} {r['max_diff']:>10.2e}")


if __name__ == "__main__":
    main()
