"""Kicked evolution with local sigma^z dephasing in linear time.

Dephasing by ``sigma^z_i`` is quadratic in fermions, so the pair moments

    n_k = <c_k^dag c_k>,  m_k = <c_{-k} c_k>

obey a closed linear system between kicks. Per pair mode there are three
real variables ``(n_k, Re m_k, Im m_k)``; self-modes carry ``n_k`` only. The
dephasing mixes all occupations through their mean, so the generator is
dense but small (``~3N/2``). Because it is time independent a single matrix
exponential, composed with the kick rotation, propagates one full period.

Thermal averages with parity projection are obtained by evolving two linear
functionals per sector, the plain and the parity-weighted moments. Heisenberg
evolution does not depend on the state, and dephasing conserves parity, so
the two can be recombined with static weights at every kick.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import expit

from .errors import DegenerateFunctionalError, NumericalError, StateValidityError
from .modes import ModeGrid, Sector, bdg_params, build_grid
from .thermal import (
    PAIR_GROUND,
    SELF_FILLED,
    SELF_DUAL,
    Charger,
    ThermalParams,
    _finite_beta_sectors,
    sector_weights,
    zero_temperature_ensemble,
)

__all__ = [
    "Variant",
    "DephasingState",
    "KickRotation",
    "LinearGenerator",
    "PeriodPropagator",
    "ode_generator",
    "gibbs_mode_moments",
    "build_period_propagator",
    "rk4_propagate",
    "dephasing_trajectory",
]


class Variant(enum.Enum):
    PLAIN = "plain"
    PARITY_WEIGHTED = "parity"


def _pair_index(grid: ModeGrid):
    p = grid.n_pairs
    base = 3 * np.arange(p)
    return base, base + 1, base + 2, 3 * p + np.arange(grid.n_self)


@dataclass(frozen=True, eq=False)
class DephasingState:
    """Moment vector on a grid.

    ``values`` is laid out as ``(n, Re m, Im m)`` for every pair mode followed
    by ``n`` for every self-mode. ``constant`` is the value the functional
    assigns to the identity (1 for a normalised state).
    """

    grid: ModeGrid
    values: np.ndarray
    variant: Variant = Variant.PLAIN
    constant: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_variables,):
            raise ValueError(f"expected {self.grid.n_variables} moments, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values[0 : 3 * self.grid.n_pairs : 3]

    @property
    def re_m(self):
        return self.values[1 : 3 * self.grid.n_pairs : 3]

    @property
    def im_m(self):
        return self.values[2 : 3 * self.grid.n_pairs : 3]

    @property
    def n_self(self):
        return self.values[3 * self.grid.n_pairs :]

    def check_bounds(self, tol: float = 1e-10) -> None:
        """Physical bounds of a normalised plain state."""
        if self.variant is not Variant.PLAIN:
            return
        c = self.constant
        n_all = np.concatenate([self.n, self.n_self]) / c
        m_abs = np.hypot(self.re_m, self.im_m) / c
        if np.any(n_all < -tol) or np.any(n_all > 1 + tol) or np.any(m_abs > 0.5 + tol):
            raise StateValidityError("moments outside the physical range")

    def energy(self, g: float) -> float:
        """``(g/2) [sum_pairs 2(1 - 2n) + sum_self (1 - 2n)]`` (times ``constant``)."""
        return 0.5 * g * float(_observable_weights(self.grid) @ np.append(self.values, self.constant))


@dataclass(frozen=True)
class KickRotation:
    """Rotation of every ``(Re m_k, Im m_k)`` by ``angle`` (``4b`` for a kick of strength ``b``)."""

    angle: float

    @classmethod
    def from_kick(cls, b: float) -> "KickRotation":
        return cls(4.0 * b)

    def matrix(self, grid: ModeGrid) -> np.ndarray:
        """Rotation acting on the moment vector, shape ``(d, d)``."""
        d = grid.n_variables
        out = np.eye(d)
        _, re, im, _ = _pair_index(grid)
        c, s = math.cos(self.angle), math.sin(self.angle)
        out[re, re] = c
        out[re, im] = -s
        out[im, re] = s
        out[im, im] = c
        return out


@dataclass(frozen=True, eq=False)
class LinearGenerator:
    """``dx/dt = matrix @ x + drive * c`` for moments ``x`` and identity value ``c``."""

    grid: ModeGrid
    matrix: np.ndarray
    drive: np.ndarray

    def augmented(self) -> np.ndarray:
        d = self.grid.n_variables
        out = np.zeros((d + 1, d + 1))
        out[:d, :d] = self.matrix
        out[:d, d] = self.drive
        return out

    def __call__(self, x, c=1.0):
        return self.matrix @ x + np.multiply.outer(self.drive, c)


def ode_generator(grid: ModeGrid, j: float, gamma_z: float) -> LinearGenerator:
    """Generator of the moment equations under ``H_I = J sum xx`` plus dephasing.

    With ``eps = 2J cos k`` and ``delta = 2J sin k``::

        dn/dt    = 2 delta Im m - 4 gz (n - mean)
        dRe m/dt = 2 eps Im m - 4 gz Re m
        dIm m/dt = -2 eps Re m + delta (1 - 2n) - 4 gz Im m

    where ``mean = (2 sum_pairs n + sum_self n) / N``. Self-modes only feel
    the dephasing mixing.
    """
    if gamma_z < 0:
        raise ValueError("gamma_z must be non-negative")
    d = grid.n_variables
    n_idx, re, im, s_idx = _pair_index(grid)
    eps = 2.0 * j * np.cos(grid.pairs)
    dl = 2.0 * j * np.sin(grid.pairs)
    a = np.zeros((d, d))
    a[n_idx, im] = 2.0 * dl
    a[re, im] = 2.0 * eps
    a[im, re] = -2.0 * eps
    a[im, n_idx] = -2.0 * dl
    drive = np.zeros(d)
    drive[im] = dl
    if gamma_z:
        a[np.arange(d), np.arange(d)] -= 4.0 * gamma_z
        occ_rows = np.concatenate([n_idx, s_idx])
        mean = np.zeros(d)
        mean[n_idx] = 2.0 / grid.n_sites
        mean[s_idx] = 1.0 / grid.n_sites
        a[occ_rows, :] += 4.0 * gamma_z * mean
    return LinearGenerator(grid, a, drive)


@dataclass(frozen=True, eq=False)
class PeriodPropagator:
    """Affine one-period map ``x -> matrix @ x + offset * c``."""

    grid: ModeGrid
    matrix: np.ndarray
    offset: np.ndarray

    def augmented(self) -> np.ndarray:
        d = self.grid.n_variables
        out = np.eye(d + 1)
        out[:d, :d] = self.matrix
        out[:d, d] = self.offset
        return out

    def __call__(self, x, c=1.0):
        return self.matrix @ x + np.multiply.outer(self.offset, c)


def build_period_propagator(generator: LinearGenerator, interval: float = 1.0,
                            kick: KickRotation | None = None) -> PeriodPropagator:
    """``R_kick @ exp(interval * generator)`` on the augmented space."""
    if not interval > 0:
        raise ValueError("interval must be positive")
    prop = expm(interval * generator.augmented())
    if not np.all(np.isfinite(prop)):
        raise NumericalError("matrix exponential of the dephasing generator is not finite")
    d = generator.grid.n_variables
    mat, off = prop[:d, :d], prop[:d, d]
    if kick is not None:
        rot = kick.matrix(generator.grid)
        mat, off = rot @ mat, rot @ off
    return PeriodPropagator(generator.grid, mat, off)


def rk4_propagate(generator: LinearGenerator, x, c=1.0, interval: float = 1.0, dt: float = 1e-3):
    """Fixed-step RK4 over ``interval``; a validation path for the propagator."""
    steps = max(1, int(round(interval / dt)))
    h = interval / steps
    x = np.array(x, dtype=float)
    for _ in range(steps):
        k1 = generator(x, c)
        k2 = generator(x + 0.5 * h * k1, c)
        k3 = generator(x + 0.5 * h * k2, c)
        k4 = generator(x + h * k3, c)
        x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def _observable_weights(grid: ModeGrid) -> np.ndarray:
    """Weights ``w`` with ``w @ [x, c] = sum_pairs 2(c - 2n) + sum_self (c - 2n)``."""
    d = grid.n_variables
    n_idx, _, _, s_idx = _pair_index(grid)
    w = np.zeros(d + 1)
    w[n_idx] = -4.0
    w[s_idx] = -2.0
    w[d] = 2.0 * grid.n_pairs + grid.n_self
    return w


def _mode_ratios(k, params: ThermalParams, self_mode: bool):
    """Plain moments and parity-weighted traces divided by ``Z_k``.

    Returns ``(n, re_m, n_par, re_m_par)``; every entry is bounded in
    ``[-1, 1]`` for all beta.
    """
    bdg = bdg_params(k, params.j_th, params.h_th)
    if self_mode:
        occ = expit(-params.beta * bdg.epsilon) if not params.zero_temperature else np.where(
            bdg.epsilon < 0, 1.0, np.where(bdg.epsilon > 0, 0.0, 0.5))
        zero = np.zeros_like(occ)
        return occ, zero, -occ, zero
    th = np.ones_like(bdg.energy) if params.zero_temperature else np.tanh(0.5 * params.beta * bdg.energy)
    pos = bdg.energy > 0
    safe = np.where(pos, bdg.energy, 1.0)
    e_ratio = np.where(pos, bdg.epsilon / safe, 0.0)
    d_ratio = np.where(pos, bdg.delta / safe, 0.0)
    if params.zero_temperature:
        th = np.where(pos, th, 0.0)
    return 0.5 * (1.0 - e_ratio * th), 0.5 * d_ratio * th, 0.5 * th * (th - e_ratio), 0.5 * d_ratio * th


def gibbs_mode_moments(k, params: ThermalParams, variant: Variant = Variant.PLAIN, self_mode: bool = False):
    """Initial ``(n, re_m, im_m)`` of one mode in the Gibbs state of ``H_th``.

    ``PLAIN`` returns ``tr(X e^{-beta H_k}) / Z_k``; ``PARITY_WEIGHTED`` returns
    ``tr(X P_k e^{-beta H_k}) / Z^P_k`` and raises
    DegenerateFunctionalError where ``Z^P_k`` vanishes. ``im_m`` is always 0.
    """
    variant = Variant(variant)
    n, re_m, n_par, re_par = _mode_ratios(np.asarray(k, dtype=float), params, self_mode)
    im_m = np.zeros_like(n)
    if variant is Variant.PLAIN:
        return n, re_m, im_m
    bdg = bdg_params(k, params.j_th, params.h_th)
    if params.zero_temperature:
        x = np.sign(bdg.epsilon) if self_mode else np.where(bdg.energy > 0, 1.0, 0.0)
    else:
        # Z^P_k / Z_k
        x = np.tanh(0.5 * params.beta * bdg.epsilon) if self_mode else np.tanh(0.5 * params.beta * bdg.energy) ** 2
    if np.any(x == 0):
        raise DegenerateFunctionalError("parity-weighted moments undefined: Z^P_k = 0")
    return n_par / x, re_par / x, im_m


def _initial_vectors(n_sites: int, params: ThermalParams):
    """Per sector: (grid, [(scale sign s, augmented vector)]) at finite beta.

    The energy is ``(g/4) sum_sectors sum_vectors s * (w @ v)``.
    """
    sectors, u = _finite_beta_sectors(n_sites, params)
    out = []
    for st, u_s in zip(sectors, u):
        grid = st.grid
        d = grid.n_variables
        n_idx, re, _, s_idx = _pair_index(grid)
        n_p, r_p, n_pp, r_pp = _mode_ratios(grid.pairs, params, False)
        n_s, _, n_sp, _ = _mode_ratios(grid.self_modes, params, True)
        x = np.zeros(d + 1)
        x[n_idx], x[re], x[s_idx], x[d] = n_p, r_p, n_s, 1.0
        x *= u_s
        # parity traces: ratio * Z_k * prod_{q != k} Z^P_q / Z = ratio * u * prod_{q != k} rho_q
        scale = u_s * st.loo_sign * np.exp(st.loo_log)
        p = grid.n_pairs
        y = np.zeros(d + 1)
        y[n_idx] = n_pp * scale[:p]
        y[re] = r_pp * scale[:p]
        y[s_idx] = n_sp * scale[p:]
        y[d] = u_s * st.rho_prod_float
        out.append((grid, [(1.0, x), (float(grid.sector.sign), y)]))
    return out


def _zero_temperature_vectors(n_sites: int, params: ThermalParams):
    if params.j_th == 0 and params.h_th == 0:
        # ground space is the whole Hilbert space
        grid = build_grid(n_sites, Sector.EVEN)
        v = np.zeros(grid.n_variables + 1)
        idx = _pair_index(grid)
        v[idx[0]] = 0.5
        v[idx[3]] = 0.5
        v[-1] = 1.0
        return [(grid, [(2.0, v)])]
    by_sector = {}
    for conf in zero_temperature_ensemble(n_sites, params):
        grid = conf.grid
        d = grid.n_variables
        n_idx, re, _, s_idx = _pair_index(grid)
        n_g, r_g, _, _ = _mode_ratios(grid.pairs, params, False)
        ground = conf.pair_states == PAIR_GROUND
        v = np.zeros(d + 1)
        # the odd block {|10>, |01>} averages to n = 1/2, m = 0
        v[n_idx] = np.where(ground, n_g, 0.5)
        v[re] = np.where(ground, r_g, 0.0)
        v[s_idx] = np.where(conf.self_states == SELF_FILLED, 1.0, 0.0)
        v[d] = 1.0
        # a definite-parity state: plain and parity functionals coincide
        by_sector.setdefault(conf.sector, (grid, []))[1].append((2.0 * conf.weight, v))
    return list(by_sector.values())


def dephasing_trajectory(n_sites: int, m_max: int, charger: Charger = SELF_DUAL,
                         params: ThermalParams = ThermalParams(), gamma_z: float = 0.0,
                         method: str = "expm", dt: float = 1e-3, sectors: str = "both") -> np.ndarray:
    """Battery energy ``E_N(m)`` for ``m = 0..m_max`` under kicks and dephasing.

    Parameters
    ----------
    method : {"expm", "rk4"}
        One matrix exponential per sector, or step-by-step RK4 with step
        ``dt`` (validation only).
    sectors : {"both", "even"}
        ``both`` averages the two parity sectors of the Gibbs state; ``even``
        starts from the Gibbs state projected on even parity and normalised.

    Returns
    -------
    np.ndarray
        Energies, shape ``(m_max + 1,)``.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    if method not in ("expm", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    if sectors not in ("both", "even"):
        raise ValueError(f"sectors must be 'both' or 'even', got {sectors!r}")
    groups = _zero_temperature_vectors(n_sites, params) if params.zero_temperature else _initial_vectors(n_sites, params)
    norm = 1.0
    trivial = params.zero_temperature and params.j_th == 0 and params.h_th == 0
    if sectors == "even" and not trivial:
        # the even group alone carries w_+ E_+ (with H_th = 0 both averages are 0)
        groups = [gv for gv in groups if gv[0].sector is Sector.EVEN]
        norm = sector_weights(n_sites, params).w_plus
        if not norm > 0:
            raise DegenerateFunctionalError("the Gibbs state has no weight in the even sector")
    kick = KickRotation.from_kick(charger.b)
    energy = np.zeros(m_max + 1)
    for grid, vectors in groups:
        d = grid.n_variables
        gen = ode_generator(grid, charger.j, gamma_z)
        w = _observable_weights(grid)
        signs = np.array([s for s, _ in vectors])
        state = np.stack([v for _, v in vectors], axis=1)  # (d + 1, n_vec)
        if method == "expm":
            prop = build_period_propagator(gen, 1.0, kick).augmented()
            step = lambda s: prop @ s  # noqa: E731
        else:
            rot = kick.matrix(grid)

            def step(s):
                x = rk4_propagate(gen, s[:d], s[d], 1.0, dt)
                return np.vstack([rot @ x, s[d:]])
        for m in range(m_max + 1):
            energy[m] += (w @ state) @ signs
            if m < m_max:
                state = step(state)
    return 0.25 * charger.g * energy / norm
