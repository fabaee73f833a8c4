"""Conversion of dimensionless model parameters to laboratory units.

Time is measured in kick periods ``tau_phys`` and energies in units with
``hbar = k_B = 1``. A dimensionless rate ``gamma`` is ``gamma / tau_phys``
in the lab, and a dimensionless temperature ``T = 1/beta`` (in units of
``J_th``) corresponds to ``T_phys = hbar J_th T / k_B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import hbar, k as k_boltzmann

from .dense import DissipationChannels, coherence_times
from .errors import ConfigError

__all__ = ["UnitReport", "physical_units"]


@dataclass(frozen=True)
class UnitReport:
    tau_phys: float
    j_phys: float
    gamma_z_phys: float
    gamma_plus_phys: float
    gamma_minus_phys: float
    t1_phys: float
    t2_phys: float
    t_phi_phys: float
    j_th_phys: float | None
    t_phys: float | None

    def lines(self) -> list[str]:
        def fmt(x):
            return "inf" if x is not None and math.isinf(x) else f"{x:.6g}"

        out = [
            f"tau_phys      = {fmt(self.tau_phys)} s",
            f"J_phys        = {fmt(self.j_phys)} 1/s",
            f"gamma_z_phys  = {fmt(self.gamma_z_phys)} 1/s",
            f"gamma_+_phys  = {fmt(self.gamma_plus_phys)} 1/s",
            f"gamma_-_phys  = {fmt(self.gamma_minus_phys)} 1/s",
            f"T1_phys       = {fmt(self.t1_phys)} s",
            f"T2_phys       = {fmt(self.t2_phys)} s",
            f"T_phi_phys    = {fmt(self.t_phi_phys)} s",
        ]
        if self.j_th_phys is not None:
            out.append(f"J_th_phys     = {fmt(self.j_th_phys)} 1/s")
        if self.t_phys is not None:
            out.append(f"T_phys        = {fmt(self.t_phys)} K")
        return out


def physical_units(tau_phys: float, j: float = math.pi / 4, gamma_z: float = 0.0, gamma: float = 0.0,
                   beta: float = 1.0, omega0: float = 1.0, t_phys: float | None = None,
                   j_th_phys: float | None = None) -> UnitReport:
    """Lab-frame rates, coherence times and temperature.

    Give ``t_phys`` (kelvin) to obtain the coupling ``J_th = k_B T_phys beta / hbar``
    or ``j_th_phys`` (1/s) to obtain the temperature ``T_phys = hbar J_th / (k_B beta)``.
    """
    if not tau_phys > 0:
        raise ConfigError("tau_phys must be positive")
    if not beta > 0:
        raise ConfigError("beta must be positive to define a physical temperature")
    for name, val in (("t_phys", t_phys), ("j_th_phys", j_th_phys)):
        if val is not None and not val > 0:
            raise ConfigError(f"{name} must be positive")
    if gamma_z < 0 or gamma < 0:
        raise ConfigError("rates must be non-negative")
    ch = DissipationChannels(gamma_z, gamma, omega0, beta)
    times = coherence_times(ch)
    if t_phys is not None and j_th_phys is None:
        j_th_phys = k_boltzmann * t_phys * beta / hbar
    elif j_th_phys is not None and t_phys is None:
        t_phys = hbar * j_th_phys / (k_boltzmann * beta)
    return UnitReport(
        tau_phys, j / tau_phys, gamma_z / tau_phys, ch.gamma_plus / tau_phys, ch.gamma_minus / tau_phys,
        times.t1 * tau_phys, times.t2 * tau_phys, times.t_phi * tau_phys, j_th_phys, t_phys,
    )
