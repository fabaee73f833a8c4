"""Thermal averages of the battery energy under closed kicked evolution.

The initial state is the Gibbs state of the transverse-field Ising model
``H_th = J_th sum x_i x_{i+1} + h_th sum z_i``. Because ``H_th`` commutes with
the fermion parity ``P``, thermal averages split into even and odd parity
sectors, each evaluated on its own momentum grid through products of
single-mode partition functions. Those products are handled in signed-log
form so that chains of a thousand sites at ``beta = 10`` stay finite.

``beta = inf`` is a separate code path that works directly with the sector
ground states instead of taking a large-beta limit numerically.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NumericalError
from .modes import (
    ModeGrid,
    Sector,
    bdg_params,
    build_grid,
    evolved_observable,
    floquet_one_kick,
    floquet_power,
)
from .signedlog import SignedLog, leave_one_out

__all__ = [
    "Charger",
    "ThermalParams",
    "ModePartition",
    "SectorWeights",
    "ModeTerms",
    "SELF_DUAL",
    "mode_partition",
    "sector_weights",
    "single_mode_terms",
    "mode_response",
    "thermal_energy",
    "local_limit_energy",
    "normalized_energy",
    "thermodynamic_limit_energy",
    "parity_weight_decay",
    "zero_temperature_ensemble",
]

LOG2 = math.log(2.0)
LOG4 = math.log(4.0)


@dataclass(frozen=True)
class Charger:
    """Kicked-Ising charger: Ising coupling ``j``, kick ``b``, battery gap ``g``."""

    j: float = math.pi / 4
    b: float = -math.pi / 4
    g: float = 1.0


SELF_DUAL = Charger()


@dataclass(frozen=True)
class ThermalParams:
    """Gibbs initial state of ``j_th sum xx + h_th sum z`` at inverse temperature ``beta``."""

    j_th: float = 0.5
    h_th: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.beta >= 0):
            raise ValueError(f"beta must be >= 0 (inf allowed), got {self.beta}")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - LOG2


def _log_sinh(x):
    """log sinh(x) for x >= 0; -inf at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.sinh(np.minimum(x, 20.0)))
        large = x - LOG2 + np.log1p(-np.exp(-2.0 * np.maximum(x, 20.0)))
    return np.where(x > 20.0, large, small)


def _log_abs_one_minus_exp(x):
    """log|1 - e^{-x}| with its sign sign(x)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        pos = np.log(-np.expm1(-np.abs(x)))
        val = np.where(x >= 0, pos, -x + pos)
    return np.where(x == 0, -np.inf, val), np.sign(x)


@dataclass(frozen=True, eq=False)
class ModePartition:
    """Single-mode ``Z_k = tr e^{-beta H_k}`` and ``Z^P_k = tr P_k e^{-beta H_k}``.

    Stored as logs; ``z_k`` and ``z_p_k`` convert to floats and may overflow.
    """

    log_z: np.ndarray
    log_zp: np.ndarray
    sign_zp: np.ndarray

    @property
    def z_k(self):
        return np.exp(self.log_z)

    @property
    def z_p_k(self):
        return self.sign_zp * np.exp(self.log_zp)


def mode_partition(k, params: ThermalParams, self_mode: bool = False) -> ModePartition:
    """Partition functions of pair modes ``0 < k < pi`` or of self-modes.

    Pair modes: ``Z = 2 e^{-b eps}(cosh bE + 1)``, ``Z^P = 2 e^{-b eps}(cosh bE - 1)``.
    Self-modes: ``Z = 1 + e^{-b eps}``, ``Z^P = 1 - e^{-b eps}``.
    """
    if params.zero_temperature:
        raise ValueError("mode_partition is defined for finite beta only")
    beta = params.beta
    bdg = bdg_params(k, params.j_th, params.h_th)
    if self_mode:
        x = beta * bdg.epsilon
        log_z = np.logaddexp(0.0, -x)
        log_zp, sign_zp = _log_abs_one_minus_exp(x)
    else:
        half = 0.5 * beta * bdg.energy
        log_z = -beta * bdg.epsilon + LOG4 + 2.0 * _log_cosh(half)
        log_zp = -beta * bdg.epsilon + LOG4 + 2.0 * _log_sinh(half)
        sign_zp = np.where(np.isneginf(log_zp), 0.0, 1.0)
    return ModePartition(np.asarray(log_z, float), np.asarray(log_zp, float), np.asarray(sign_zp, float))


def _log_tanh(x):
    """log tanh(x) for x >= 0; -inf at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(-np.expm1(-2.0 * x)) - np.log1p(np.exp(-2.0 * x))


class _SectorThermo:
    """Partition-function bookkeeping for one parity sector at finite beta.

    Everything is stored relative to the unprojected ``Z_bc = prod_k Z_k``:
    the per-mode ratios ``rho_k = Z^P_k / Z_k`` lie in ``[-1, 1]``, so their
    products and leave-one-out products carry no large logarithms. Absolute
    scales only enter through differences of ``log Z_bc`` between sectors
    (see ``_finite_beta_sectors``).
    """

    def __init__(self, grid: ModeGrid, params: ThermalParams):
        self.grid = grid
        self.params = params
        beta = params.beta
        self.pair = bdg_params(grid.pairs, params.j_th, params.h_th)
        self.eps_self = bdg_params(grid.self_modes, params.j_th, params.h_th).epsilon
        self.log_zk = np.concatenate([
            mode_partition(grid.pairs, params).log_z,
            mode_partition(grid.self_modes, params, self_mode=True).log_z,
        ])
        half_self = 0.5 * beta * self.eps_self
        log_rho = np.concatenate([2.0 * _log_tanh(0.5 * beta * self.pair.energy), _log_tanh(np.abs(half_self))])
        sign_rho = np.concatenate([np.ones(grid.n_pairs), np.sign(half_self)])
        sign_rho = np.where(np.isneginf(log_rho), 0.0, sign_rho)
        self.log_rho = np.where(sign_rho == 0, -np.inf, log_rho)
        self.sign_rho = sign_rho
        self.rho_prod = SignedLog.product(self.log_rho, self.sign_rho)
        # prod_{q != k} rho_q
        self.loo_log, self.loo_sign = leave_one_out(self.log_rho, self.sign_rho)

    @property
    def rho_prod_float(self) -> float:
        return float(self.rho_prod)


def _finite_beta_sectors(n_sites: int, params: ThermalParams):
    """Both sectors and ``u_s = Z_bc,s / Z`` for each, as floats.

    ``Z = sum_s Z_bc,s (1 + s prod rho_s) / 2``. The ratio ``Z_bc,s' / Z_bc,s``
    is formed from an exactly rounded sum of per-mode log differences, so no
    logarithm of the order of ``N beta`` is ever rounded on its own.
    """
    sectors = [_SectorThermo(build_grid(n_sites, s), params) for s in (Sector.EVEN, Sector.ODD)]
    logs = [st.log_zk.tolist() for st in sectors]
    factors = []
    for st in sectors:
        with np.errstate(divide="ignore"):
            factors.append(math.log1p(st.grid.sector.sign * st.rho_prod_float) - LOG2
                           if st.grid.sector.sign * st.rho_prod_float > -1.0 else -math.inf)
    u = []
    for i in range(len(sectors)):
        terms = []
        for j in range(len(sectors)):
            diff = 0.0 if i == j else math.fsum(logs[j] + [-x for x in logs[i]])
            terms.append(diff + factors[j])
        u.append(math.exp(-float(np.logaddexp.reduce(terms))))
    return sectors, u


@dataclass(frozen=True)
class SectorWeights:
    w_plus: float
    w_minus: float


def sector_weights(n_sites: int, params: ThermalParams) -> SectorWeights:
    """Parity weights ``w_+- = Z_+- / Z`` of the Gibbs state."""
    if params.zero_temperature:
        ens = zero_temperature_ensemble(n_sites, params)
        w_plus = sum(c.weight for c in ens if c.sector is Sector.EVEN)
        return SectorWeights(float(w_plus), float(1.0 - w_plus))
    sectors, u = _finite_beta_sectors(n_sites, params)
    w = [u_s * 0.5 * (1.0 + st.grid.sector.sign * st.rho_prod_float) for st, u_s in zip(sectors, u)]
    return SectorWeights(w[0], w[1])


def mode_response(k, m, charger: Charger, params: ThermalParams):
    """``f_k(m) = <tz-coefficient of O_k(m)> / 2`` in the direction of the Gibbs block.

    The even block of ``e^{-beta H_th,k}`` is ``cosh + sinh (eps tz + delta tx)/E``;
    this returns ``(eps c_z + delta c_x') / E`` where ``c_x'`` is the
    coefficient after the frame rotation by ``4b`` that places the kick last
    in each period. Modes with ``E = 0`` return 0.
    """
    k = np.asarray(k, dtype=float)
    bdg = bdg_params(k, params.j_th, params.h_th)
    obs = evolved_observable(floquet_power(floquet_one_kick(k, charger.j, charger.b), m))
    c4, s4 = math.cos(4 * charger.b), math.sin(4 * charger.b)
    num = bdg.epsilon * obs.c_z + bdg.delta * (obs.c_x * c4 - obs.c_y * s4)
    safe = np.where(bdg.energy > 0, bdg.energy, 1.0)
    return np.where(bdg.energy > 0, num / safe, 0.0)


@dataclass(frozen=True, eq=False)
class ModeTerms:
    """Single-mode thermal terms.

    ``a`` is ``A_k(m) = tr(O_k(m) e^{-beta H_k}) / Z_k``; the parity-weighted
    trace ``B_k(m) Z^P_k = tr(O_k(m) P_k e^{-beta H_k})`` is finite even where
    ``Z^P_k`` vanishes and is carried as ``(parity_log, parity_sign)``.
    """

    a: np.ndarray
    parity_log: np.ndarray
    parity_sign: np.ndarray

    @property
    def parity_trace(self):
        return self.parity_sign * np.exp(self.parity_log)


def single_mode_terms(k, m, charger: Charger, params: ThermalParams, self_mode: bool = False) -> ModeTerms:
    if params.zero_temperature:
        raise ValueError("single_mode_terms is defined for finite beta only")
    beta = params.beta
    k = np.asarray(k, dtype=float)
    bdg = bdg_params(k, params.j_th, params.h_th)
    if self_mode:
        # O_k = tz is static; tr(tz tz e^{-bH}) = Z_k
        a = np.tanh(0.5 * beta * bdg.epsilon) * np.ones(np.broadcast(k, np.asarray(m)).shape)
        log_z = mode_partition(k, params, self_mode=True).log_z
        return ModeTerms(a, np.broadcast_to(log_z, a.shape).copy(), np.ones_like(a))
    f = mode_response(k, m, charger, params)
    a = 2.0 * np.tanh(0.5 * beta * bdg.energy) * f
    with np.errstate(divide="ignore"):
        plog = LOG4 + np.log(np.abs(f)) - beta * bdg.epsilon + _log_sinh(beta * bdg.energy)
    psign = np.sign(f) * (~np.isneginf(plog))
    return ModeTerms(a, np.where(psign == 0, -np.inf, plog), psign)


def thermal_energy(n_sites: int, m, charger: Charger = SELF_DUAL, params: ThermalParams = ThermalParams()):
    """Battery energy ``E_N(m; beta)`` after ``m`` kicks of closed evolution.

    ``m`` may be an integer or an integer array; the result has the same shape.
    """
    m_arr = np.asarray(m)
    if params.zero_temperature:
        return _zero_temperature_energy(n_sites, m_arr, charger, params)
    sectors, u = _finite_beta_sectors(n_sites, params)
    beta = params.beta
    total = np.zeros(m_arr.shape + (1,))
    mm = m_arr[..., None]
    for st, u_s in zip(sectors, u):
        s = st.grid.sector.sign
        n_pairs = st.grid.n_pairs
        # prod_{q != k} rho_q: the parity trace of mode k is A_k Z_k (pairs) or Z_k (self-modes)
        loo = st.loo_sign * np.exp(st.loo_log)
        if n_pairs:
            f = mode_response(st.grid.pairs, mm, charger, params)
            a = 2.0 * np.tanh(0.5 * beta * st.pair.energy) * f
            total += u_s * (a * (1.0 + s * loo[:n_pairs])).sum(axis=-1, keepdims=True)
        if st.grid.n_self:
            a_self = np.tanh(0.5 * beta * st.eps_self)
            total += u_s * float(np.sum(a_self + s * loo[n_pairs:]))
    out = 0.25 * charger.g * total[..., 0]
    return out if out.ndim else float(out)


def local_limit_energy(n_sites: int, m, g: float, h_th: float, beta: float):
    """Closed form of ``E_N(m; beta)`` at the self-dual point for ``J_th = 0``.

    With ``mz = tanh(beta h_th)``: ``(gN/2) * (-mz)`` when ``m = 0 mod N``,
    ``(gN/2) mz^(N-1)`` when ``N`` is even and ``m = N/2 mod N``, else 0.
    """
    mz = math.copysign(1.0, h_th) if math.isinf(beta) and h_th != 0 else math.tanh(beta * h_th)
    m_arr = np.asarray(m)
    r = m_arr % n_sites
    val = np.where(r == 0, -mz, 0.0)
    if n_sites % 2 == 0:
        val = np.where(r == n_sites // 2, mz ** (n_sites - 1), val)
    out = 0.5 * g * n_sites * val
    return out if out.ndim else float(out)


def normalized_energy(e_m, e_0, n_sites: int):
    """``(E_N(m) - E_N(0)) / N``."""
    return (np.asarray(e_m) - e_0) / n_sites


def thermodynamic_limit_energy(m: int, charger: Charger = SELF_DUAL, params: ThermalParams = ThermalParams(),
                               tol: float = 1e-10) -> float:
    """Energy per site for ``N -> infinity`` after ``m`` kicks.

    Parity projections vanish in this limit, leaving
    ``E/N = (g / 4 pi) int_0^pi A_k(m) dk``.
    """
    beta = params.beta

    def integrand(k):
        e = bdg_params(k, params.j_th, params.h_th).energy
        th = 1.0 if math.isinf(beta) else math.tanh(0.5 * beta * e)
        return 2.0 * th * float(mode_response(k, m, charger, params))

    limit = max(200, 50 * int(m) + 50)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(integrand, 0.0, math.pi, epsabs=tol, epsrel=tol, limit=limit)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature did not converge for m={m}: {exc}") from exc
    if err > max(tol, tol * abs(val)) * 10:
        raise NumericalError(f"quadrature error estimate {err:.2e} above tolerance")
    return charger.g / (4.0 * math.pi) * val


def parity_weight_decay(w0_plus: float, n_sites: int, gamma_plus: float, gamma_minus: float, t: float) -> SectorWeights:
    """Relaxation of parity weights towards 1/2 under ladder-operator dissipation.

    ``w_+(t) = (1 + (2 w_+(0) - 1) exp(-N (gamma_+ + gamma_-) t)) / 2``.
    """
    if gamma_plus < 0 or gamma_minus < 0 or t < 0:
        raise ValueError("rates and time must be non-negative")
    w = 0.5 * (1.0 + (2.0 * w0_plus - 1.0) * math.exp(-n_sites * (gamma_plus + gamma_minus) * t))
    return SectorWeights(w, 1.0 - w)


# ---------------------------------------------------------------------------
# zero temperature

# per-mode states at beta = inf
PAIR_GROUND, PAIR_ODD, PAIR_EXCITED = 0, 1, 2
SELF_EMPTY, SELF_FILLED = 0, 1


@dataclass(frozen=True, eq=False)
class GroundConfiguration:
    """One Fock configuration of the ground space, with its statistical weight.

    ``pair_states`` holds PAIR_GROUND / PAIR_ODD per pair mode and
    ``self_states`` SELF_EMPTY / SELF_FILLED per self-mode.
    """

    sector: Sector
    grid: ModeGrid
    weight: float
    pair_states: np.ndarray
    self_states: np.ndarray


def _sector_ground(grid: ModeGrid, params: ThermalParams, rtol: float = 1e-12):
    """Ground energy and ground configurations (with degeneracies) of one sector."""
    pair = bdg_params(grid.pairs, params.j_th, params.h_th)
    eps_self = bdg_params(grid.self_modes, params.j_th, params.h_th).epsilon
    scale = 1.0 + abs(params.j_th) + abs(params.h_th)
    tol = rtol * scale * max(grid.n_sites, 1)
    if np.any(pair.energy <= tol):
        raise ValueError("degenerate pair mode (E_k = 0) at zero temperature")
    base_pairs = np.full(grid.n_pairs, PAIR_GROUND)
    energy = float(np.sum(pair.epsilon - pair.energy))
    free = np.abs(eps_self) <= tol  # zero-cost parity flips
    base_self = np.where(eps_self < 0, SELF_FILLED, SELF_EMPTY)
    energy += float(np.sum(np.where(base_self == SELF_FILLED, eps_self, 0.0)))
    parity = int(np.prod(np.where(base_self == SELF_FILLED, -1, 1)))
    target = grid.sector.sign
    configs = []  # (degeneracy, pair_states, self_states)
    if np.any(free):
        idx = np.flatnonzero(free)
        for bits in range(2 ** len(idx)):
            st = base_self.copy()
            st[idx] = [(bits >> i) & 1 for i in range(len(idx))]
            fixed = np.where(st == SELF_FILLED, -1, 1)
            if int(np.prod(fixed)) == target:
                configs.append((1.0, base_pairs, st))
        return energy, configs
    if parity == target:
        return energy, [(1.0, base_pairs, base_self)]
    # cheapest single parity flip
    costs = np.concatenate([pair.energy, np.abs(eps_self)])
    cmin = float(costs.min())
    for i in np.flatnonzero(costs <= cmin + tol):
        if i < grid.n_pairs:
            ps = base_pairs.copy()
            ps[i] = PAIR_ODD
            configs.append((2.0, ps, base_self))
        else:
            ss = base_self.copy()
            ss[i - grid.n_pairs] ^= 1
            configs.append((1.0, base_pairs, ss))
    return energy + cmin, configs


def zero_temperature_ensemble(n_sites: int, params: ThermalParams) -> list[GroundConfiguration]:
    """The ground-space projector of ``H_th`` as weighted Fock configurations."""
    grounds = {}
    for sector in (Sector.EVEN, Sector.ODD):
        grid = build_grid(n_sites, sector)
        grounds[sector] = (grid, *_sector_ground(grid, params))
    e_min = min(v[1] for v in grounds.values())
    tol = 1e-10 * (1.0 + abs(e_min))
    chosen = []
    for sector, (grid, e, configs) in grounds.items():
        if e <= e_min + tol:
            chosen.extend((sector, grid, d, ps, ss) for d, ps, ss in configs)
    total = sum(c[2] for c in chosen)
    return [GroundConfiguration(s, g, d / total, ps, ss) for s, g, d, ps, ss in chosen]


def _zero_temperature_energy(n_sites, m_arr, charger, params):
    if params.j_th == 0 and params.h_th == 0:
        out = np.zeros(m_arr.shape)
        return out if out.ndim else 0.0
    total = np.zeros(m_arr.shape)
    for conf in zero_temperature_ensemble(n_sites, params):
        e = np.zeros(m_arr.shape)
        if conf.grid.n_pairs:
            f = mode_response(conf.grid.pairs, m_arr[..., None], charger, params)
            occ = np.where(conf.pair_states == PAIR_GROUND, 2.0, 0.0)
            e = e + (f * occ).sum(axis=-1)
        if conf.grid.n_self:
            e = e + float(np.sum(np.where(conf.self_states == SELF_EMPTY, 1.0, -1.0)))
        total = total + conf.weight * e
    out = 0.5 * charger.g * total
    return out if out.ndim else float(out)
