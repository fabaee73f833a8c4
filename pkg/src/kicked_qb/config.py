"""Run configuration, trajectory records and their CSV form."""
from __future__ import annotations

import dataclasses
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dense import MAX_SITES, DissipationChannels
from .errors import ConfigError
from .thermal import Charger, ThermalParams

__all__ = ["ENGINES", "RunConfig", "Trajectory", "read_trajectory"]

ENGINES = ("analytic", "dephasing", "dense")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one trajectory.

    ``engine="auto"`` resolves to the cheapest engine that supports the
    requested channels: analytic without dissipation, dephasing with
    ``gamma_z`` only, dense otherwise.
    """

    n_sites: int = 10
    kicks: int = 10
    j: float = math.pi / 4
    b: float = -math.pi / 4
    g: float = 1.0
    j_th: float = 0.5
    h_th: float = 1.0
    beta: float = 1.0
    gamma_z: float = 0.0
    gamma: float = 0.0
    omega0: float = 1.0
    engine: str = "auto"
    dt: float = 1e-2
    ergotropy: bool = False
    out: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        data = dict(data)
        if isinstance(data.get("beta"), str):
            data["beta"] = float(data["beta"])  # allows "inf"
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def resolved(self) -> "RunConfig":
        """Validated copy with ``engine`` made explicit."""
        engine = self.engine
        if engine == "auto":
            if self.gamma > 0:
                engine = "dense"
            elif self.gamma_z > 0:
                engine = "dephasing"
            else:
                engine = "analytic"
        cfg = dataclasses.replace(self, engine=engine)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ConfigError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if int(self.kicks) != self.kicks or self.kicks < 0:
            raise ConfigError(f"kicks must be a non-negative integer, got {self.kicks}")
        if not self.beta >= 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if self.gamma_z < 0 or self.gamma < 0:
            raise ConfigError("rates must be non-negative")
        if self.engine == "analytic" and (self.gamma_z or self.gamma):
            raise ConfigError("engine=analytic requires gamma_z = gamma = 0")
        if self.engine == "dephasing" and self.gamma:
            raise ConfigError("engine=dephasing requires gamma = 0; use engine=dense for the thermal channel")
        if self.engine == "dense":
            if self.n_sites > MAX_SITES:
                raise ConfigError(f"engine=dense supports n_sites <= {MAX_SITES}")
            steps = round(1.0 / self.dt) if self.dt > 0 else 0
            if steps < 1 or abs(steps * self.dt - 1.0) > 1e-12:
                raise ConfigError(f"dt must divide the unit kick interval, got {self.dt}")
            if self.gamma > 0 and self.beta == 0:
                raise ConfigError("the thermal channel needs beta > 0")
        if self.ergotropy and self.engine != "dense":
            raise ConfigError("ergotropy requires engine=dense")

    @property
    def charger(self) -> Charger:
        return Charger(self.j, self.b, self.g)

    @property
    def thermal(self) -> ThermalParams:
        return ThermalParams(self.j_th, self.h_th, self.beta)

    @property
    def channels(self) -> DissipationChannels:
        # the bath shares the temperature of the initial state
        return DissipationChannels(self.gamma_z, self.gamma, self.omega0, self.beta if self.gamma else math.inf)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


@dataclass(eq=False)
class Trajectory:
    """Per-kick energy and (optionally) ergotropy with a metadata block."""

    m: np.ndarray
    energy: np.ndarray
    n_sites: int
    ergotropy: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    COLUMNS = ("m", "t", "E", "dE", "W", "dW")

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=int)
        self.energy = np.asarray(self.energy, dtype=float)
        if self.m.size == 0 or self.m[0] != 0 or np.any(np.diff(self.m) <= 0):
            raise ValueError("kick indices must start at 0 and increase strictly")
        if self.ergotropy is not None:
            self.ergotropy = np.asarray(self.ergotropy, dtype=float)

    @property
    def t(self) -> np.ndarray:
        return self.m.astype(float)

    @property
    def d_energy(self) -> np.ndarray:
        return (self.energy - self.energy[0]) / self.n_sites

    @property
    def d_ergotropy(self) -> np.ndarray | None:
        if self.ergotropy is None:
            return None
        return (self.ergotropy - self.ergotropy[0]) / self.n_sites

    def to_csv(self, stream=None) -> str:
        """CSV text with a ``#``-prefixed JSON metadata line; written to ``stream`` if given."""
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.meta, sort_keys=True, default=_json_default) + "\n")
        buf.write(",".join(self.COLUMNS) + "\n")
        w = self.ergotropy
        dw = self.d_ergotropy
        for i, m in enumerate(self.m):
            row = [m, float(m), self.energy[i], self.d_energy[i],
                   None if w is None else w[i], None if dw is None else dw[i]]
            buf.write(",".join(_fmt(x) for x in row) + "\n")
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def read_trajectory(path) -> Trajectory:
    """Inverse of ``Trajectory.to_csv``."""
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("missing metadata line")
        meta = json.loads(first[1:])
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    col = {name: [r[i] for r in rows] for i, name in enumerate(header)}
    work = None
    if rows and col["W"][0] != "":
        work = np.array(col["W"], dtype=float)
    n_sites = int(meta.get("config", {}).get("n_sites", 1))
    return Trajectory(np.array(col["m"], dtype=int), np.array(col["E"], dtype=float), n_sites, work, meta)
