"""Dispatch a RunConfig to one of the three engines."""
from __future__ import annotations

import numpy as np

from . import __version__, _kernels
from .config import RunConfig, Trajectory
from .dense import dense_trajectory
from .dephasing import dephasing_trajectory
from .thermal import thermal_energy

__all__ = ["run_trajectory"]


def run_trajectory(config: RunConfig) -> Trajectory:
    """Energy (and ergotropy) after each of ``config.kicks`` kicks."""
    cfg = config.resolved()
    m = np.arange(cfg.kicks + 1)
    meta = {"config": cfg.to_dict(), "engine": cfg.engine, "version": __version__}
    work = None
    if cfg.engine == "analytic":
        energy = thermal_energy(cfg.n_sites, m, cfg.charger, cfg.thermal)
    elif cfg.engine == "dephasing":
        energy = dephasing_trajectory(cfg.n_sites, cfg.kicks, cfg.charger, cfg.thermal, cfg.gamma_z)
    else:
        res = dense_trajectory(cfg.n_sites, cfg.kicks, cfg.charger, cfg.thermal, cfg.channels,
                               dt=cfg.dt, ergotropy=cfg.ergotropy)
        energy, work = res.energy, res.ergotropy
        meta.update(method=res.method, dt=res.dt, backend=_kernels.BACKEND, sampling="post-kick at integer t")
    return Trajectory(m, energy, cfg.n_sites, work, meta)
