"""Cross-engine validation suite.

Each check compares two independent computations and reports the largest
deviation against a tolerance. ``tolerance_scale`` multiplies every
tolerance; setting it to 0 is a negative control that must fail.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .dense import DissipationChannels, build_hamiltonians, dense_trajectory, evolve_interval, gibbs_state, measure
from .dephasing import dephasing_trajectory
from .modes import floquet_one_kick, floquet_power
from .thermal import SELF_DUAL, ThermalParams, local_limit_energy, sector_weights, thermal_energy

__all__ = ["CheckResult", "run_suite", "format_report"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    error: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)


def _local_limit(sizes):
    err = 0.0
    for n in sizes:
        for beta in (0.5, 2.0, 10.0):
            m = np.arange(2 * n + 1)
            e = thermal_energy(n, m, SELF_DUAL, ThermalParams(0.0, 1.0, beta))
            err = max(err, float(np.max(np.abs(e - local_limit_energy(n, m, 1.0, 1.0, beta)))))
    return err


def _analytic_vs_dense(sizes):
    err = 0.0
    for n in sizes:
        for beta in (0.0, 0.5, 2.0, 10.0):
            p = ThermalParams(0.5, 1.0, beta)
            e = thermal_energy(n, np.arange(2 * n + 1), SELF_DUAL, p)
            d = dense_trajectory(n, 2 * n, SELF_DUAL, p).energy
            err = max(err, float(np.max(np.abs((e - e[0]) - (d - d[0])))) / n)
    return err


def _dephasing_vs_dense(sizes, rates):
    err = 0.0
    p = ThermalParams(0.5, 1.0, 2.0)
    for n in sizes:
        for gz in rates:
            a = dephasing_trajectory(n, 12, SELF_DUAL, p, gz)
            d = dense_trajectory(n, 12, SELF_DUAL, p, DissipationChannels(gamma_z=gz), dt=1e-3).energy
            err = max(err, float(np.max(np.abs(a - d))))
    return err


def _sector_weights(sizes):
    err = 0.0
    for n in sizes:
        p = ThermalParams(0.5, 1.0, 2.0)
        ham = build_hamiltonians(n, SELF_DUAL, p)
        w = sector_weights(n, p)
        err = max(err, abs(measure(gibbs_state(ham.h_th, p.beta), ham.parity) - (w.w_plus - w.w_minus)))
    return err


def _chebyshev(n_cases=2000, seed=0):
    rng = np.random.default_rng(seed)
    k = rng.uniform(0, math.pi, n_cases)
    j = rng.uniform(-math.pi, math.pi, n_cases)
    b = rng.uniform(-math.pi, math.pi, n_cases)
    m = rng.integers(0, 200, n_cases)
    one = floquet_one_kick(k, j, b)
    closed = floquet_power(one, m).matrix()
    err = 0.0
    for i in range(n_cases):
        ref = np.linalg.matrix_power(one.matrix()[i], int(m[i]))
        err = max(err, float(np.max(np.abs(ref - closed[i]))))
    return err


def _single_qubit():
    err = 0.0
    rho0 = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]], dtype=complex)
    h = np.zeros((2, 2))
    deph = evolve_interval(rho0, h, DissipationChannels(gamma_z=0.3), dt=1e-3)
    err = max(err, abs(deph[0, 1] - rho0[0, 1] * math.exp(-0.6)))
    ch = DissipationChannels(gamma=0.2, beta=1.0, omega0=1.0)
    rel = evolve_interval(rho0, h, ch, dt=1e-3)
    rate = ch.gamma_plus + ch.gamma_minus
    ss = 0.5 * (1.0 - math.tanh(0.5))
    err = max(err, abs(rel[0, 0].real - ((rho0[0, 0].real - ss) * math.exp(-rate) + ss)))
    return err


def _dephasing_peak():
    """Violations of: peak at m = 50 for both curves, dephased peak not above closed peak."""
    bad = 0
    for beta in (0.5, 1.0, 10.0):
        p = ThermalParams(0.5, 1.0, beta)
        closed = thermal_energy(100, np.arange(101), SELF_DUAL, p)
        deph = dephasing_trajectory(100, 100, SELF_DUAL, p, 0.005)
        d_c, d_d = closed - closed[0], deph - deph[0]
        bad += int(np.argmax(d_c) != 50) + int(np.argmax(d_d) != 50) + int(d_d[50] > d_c[50])
    return float(bad)


def _bath_ergotropy():
    """Violations of: dW <= dE at every kick, both peaking at m = 5."""
    p = ThermalParams(0.5, 1.0, 2.0)
    tr = dense_trajectory(10, 10, SELF_DUAL, p, DissipationChannels(gamma=0.01, beta=2.0), dt=1e-2, ergotropy=True)
    d_e = tr.energy - tr.energy[0]
    d_w = tr.ergotropy - tr.ergotropy[0]
    return float(np.sum(d_w > d_e + 1e-12) + int(np.argmax(d_e) != 5) + int(np.argmax(d_w) != 5))


def _suite(level):
    fast = [
        ("local limit N=4,6 (closed form)", lambda: _local_limit((4, 6)), 1e-12),
        ("analytic vs dense N=4,6", lambda: _analytic_vs_dense((4, 6)), 1e-8),
        ("dephasing vs dense N=4", lambda: _dephasing_vs_dense((4,), (0.01,)), 1e-6),
        ("parity weights vs dense N=4", lambda: _sector_weights((4,)), 1e-10),
        ("Chebyshev power vs products", _chebyshev, 1e-9),
        ("single-qubit closed forms", _single_qubit, 1e-8),
    ]
    if level == "fast":
        return fast
    return fast + [
        ("local limit N=8,64", lambda: _local_limit((8, 64)), 1e-12),
        ("analytic vs dense N=8", lambda: _analytic_vs_dense((8,)), 1e-8),
        ("dephasing vs dense N=4,6 all rates", lambda: _dephasing_vs_dense((4, 6), (0.005, 0.01, 0.05)), 1e-6),
        ("N=100 dephasing peak regression", _dephasing_peak, 0.0),
        ("N=10 thermal channel ergotropy regression", _bath_ergotropy, 0.0),
    ]


def run_suite(level: str = "fast", tolerance_scale: float = 1.0) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    out = []
    for name, fn, tol in _suite(level):
        t0 = time.perf_counter()
        err = fn()
        out.append(CheckResult(name, float(err), tol * tolerance_scale, time.perf_counter() - t0))
    return out


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'max error':>10}  {'tolerance':>10}  {'time/s':>7}  status"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.error:10.3e}  {r.tolerance:10.3e}  {r.seconds:7.2f}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
