"""Full Hilbert-space reference simulation of the kicked battery.

Basis states are integers whose bit ``N - 1 - i`` encodes site ``i``; a
cleared bit means ``sigma^z = +1``. Diagonal operators (battery, kick,
parity) are stored as 1-D arrays, and Ising-type operators as a list of
bit-flip masks with coefficients plus an optional diagonal.

Between kicks the state follows the Lindblad equation with local dephasing
and thermal ladder channels, integrated by fixed-step RK4 in a compiled
kernel when available. When every rate vanishes the interval map is
unitary and is applied exactly instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, ConsistencyError, IntegratorDivergence, InvalidSizeError, StateValidityError
from .thermal import SELF_DUAL, Charger, ThermalParams

__all__ = [
    "MAX_SITES",
    "FlipOperator",
    "DenseHamiltonians",
    "DissipationChannels",
    "CoherenceTimes",
    "DenseTrajectory",
    "build_hamiltonians",
    "gibbs_state",
    "validate_state",
    "lindblad_rhs",
    "evolve_interval",
    "apply_kick",
    "measure",
    "dense_trajectory",
    "coherence_times",
    "thermal_t1",
]

MAX_SITES = 12


@dataclass(frozen=True, eq=False)
class FlipOperator:
    """``sum_t coeffs[t] X^{masks[t]} + diag(diag)`` with ``X^mask`` flipping bits."""

    n_sites: int
    masks: np.ndarray
    coeffs: np.ndarray
    diag: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def to_dense(self) -> np.ndarray:
        idx = np.arange(self.dim)
        out = np.diag(self.diag).astype(float)
        for m, c in zip(self.masks, self.coeffs):
            out[idx ^ m, idx] += c
        return out

    def __matmul__(self, other):
        other = np.asarray(other)
        idx = np.arange(self.dim)
        out = self.diag.reshape((-1,) + (1,) * (other.ndim - 1)) * other
        for m, c in zip(self.masks, self.coeffs):
            out = out + c * other[idx ^ m]
        return out


def _sz(n_sites: int) -> np.ndarray:
    """``sum_i sigma^z_i`` on the computational basis."""
    idx = np.arange(1 << n_sites)
    pc = np.zeros_like(idx)
    for i in range(n_sites):
        pc += (idx >> i) & 1
    return (n_sites - 2 * pc).astype(float)


def _bond_masks(n_sites: int) -> np.ndarray:
    bit = lambda i: 1 << (n_sites - 1 - i)  # noqa: E731
    return np.array([bit(i) | bit((i + 1) % n_sites) for i in range(n_sites)], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DenseHamiltonians:
    n_sites: int
    h_i: FlipOperator
    h_k: np.ndarray
    h_0: np.ndarray
    h_th: FlipOperator
    parity: np.ndarray


def build_hamiltonians(n_sites: int, charger: Charger = SELF_DUAL,
                       thermal: ThermalParams = ThermalParams()) -> DenseHamiltonians:
    """Ising coupling, kick, battery, thermal Hamiltonian and parity.

    Bonds are ``(i, i + 1 mod N)``, so a two-site ring carries its single
    bond twice.
    """
    if int(n_sites) != n_sites or not 2 <= n_sites <= MAX_SITES:
        raise InvalidSizeError(f"dense simulation needs 2 <= n_sites <= {MAX_SITES}, got {n_sites!r}")
    n_sites = int(n_sites)
    dim = 1 << n_sites
    masks = _bond_masks(n_sites)
    sz = _sz(n_sites)
    ones = np.ones(n_sites)
    h_i = FlipOperator(n_sites, masks, charger.j * ones, np.zeros(dim))
    h_th = FlipOperator(n_sites, masks, thermal.j_th * ones, thermal.h_th * sz)
    parity = np.where(((n_sites - sz) / 2).astype(int) % 2 == 0, 1.0, -1.0)
    return DenseHamiltonians(n_sites, h_i, charger.b * sz, 0.5 * charger.g * sz, h_th, parity)


@dataclass(frozen=True)
class DissipationChannels:
    """Dephasing ``gamma_z`` and a thermal bath at inverse temperature ``beta``.

    The bath absorbs and emits at ``gamma_plus = gamma n_th`` and
    ``gamma_minus = gamma (n_th + 1)`` with ``n_th = 1 / (e^{beta omega0} - 1)``.
    """

    gamma_z: float = 0.0
    gamma: float = 0.0
    omega0: float = 1.0
    beta: float = math.inf

    def __post_init__(self):
        if self.gamma_z < 0 or self.gamma < 0:
            raise ConfigError("dissipation rates must be non-negative")
        if self.gamma > 0 and not (self.beta > 0 and self.omega0 > 0):
            raise ConfigError("a thermal channel needs beta > 0 and omega0 > 0")

    @property
    def n_th(self) -> float:
        if self.gamma == 0:
            return 0.0
        return 1.0 / math.expm1(self.beta * self.omega0) if math.isfinite(self.beta) else 0.0

    @property
    def gamma_plus(self) -> float:
        return self.gamma * self.n_th

    @property
    def gamma_minus(self) -> float:
        return self.gamma * (self.n_th + 1.0)

    @property
    def is_unitary(self) -> bool:
        return self.gamma_z == 0 and self.gamma == 0


def gibbs_state(h_th, beta: float) -> np.ndarray:
    """``e^{-beta H} / Z``; ``beta = inf`` gives the normalised ground projector."""
    h = h_th.to_dense() if isinstance(h_th, FlipOperator) else np.asarray(h_th)
    dim = h.shape[0]
    par = _basis_parity(dim)
    if np.all(h[par[:, None] != par[None, :]] == 0):
        # parity-conserving: diagonalise each block so the state is exactly block diagonal
        blocks = [np.flatnonzero(par == s) for s in (0, 1)]
    else:
        blocks = [np.arange(dim)]
    eig = [np.linalg.eigh(h[np.ix_(idx, idx)]) for idx in blocks]
    w_min = min(float(w[0]) for w, _ in eig)
    scale = max(1.0, max(float(np.max(np.abs(w))) for w, _ in eig))
    pops = []
    for w, _ in eig:
        if math.isinf(beta):
            pops.append((w <= w_min + 1e-10 * scale).astype(float))
        else:
            pops.append(np.exp(-beta * (w - w_min)))
    total = sum(float(p.sum()) for p in pops)
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for idx, (w, v), p in zip(blocks, eig, pops):
        block = (v * (p / total)) @ v.conj().T
        rho[np.ix_(idx, idx)] = 0.5 * (block + block.conj().T)
    return rho


def validate_state(rho, tol: float = 1e-10, psd_tol: float = 1e-8) -> None:
    """Raise StateValidityError unless ``rho`` is a density matrix within tolerance."""
    rho = np.asarray(rho)
    if abs(np.trace(rho) - 1.0) > tol:
        raise StateValidityError(f"trace {np.trace(rho)} differs from 1")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise StateValidityError("state is not Hermitian")
    if np.linalg.eigvalsh(rho)[0] < -psd_tol:
        raise StateValidityError("state has a negative eigenvalue")


def lindblad_rhs(rho, h, channels: DissipationChannels) -> np.ndarray:
    """``-i[H, rho]`` plus dephasing and ladder dissipators on every site."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    n_sites = int(rho.shape[0]).bit_length() - 1
    gz, gp, gm = channels.gamma_z, channels.gamma_plus, channels.gamma_minus
    if isinstance(h, FlipOperator):
        return _kernels.lindblad_rhs(rho, h.masks, h.coeffs.astype(float), h.diag.astype(float), n_sites, gz, gp, gm)
    h = np.asarray(h)
    if h.ndim == 1:
        h = np.diag(h)
    zero = np.zeros(rho.shape[0])
    out = _kernels.lindblad_rhs(rho, np.zeros(0, dtype=np.int64), np.zeros(0), zero, n_sites, gz, gp, gm)
    return out - 1j * (h @ rho - rho @ h)


def _basis_parity(dim: int) -> np.ndarray:
    """Number of set bits mod 2 of every basis index."""
    idx = np.arange(dim)
    par = np.zeros_like(idx)
    for s in range(max(dim.bit_length() - 1, 0)):
        par ^= (idx >> s) & 1
    return par


def _parity_block_diagonal(rho, tol: float = 0.0) -> bool:
    par = _basis_parity(rho.shape[0])
    off = par[:, None] != par[None, :]
    return bool(np.max(np.abs(rho[off]), initial=0.0) <= tol)


def evolve_interval(rho, h_i, channels: DissipationChannels, dt: float = 1e-2,
                    duration: float = 1.0, tol: float = 1e-8) -> np.ndarray:
    """Fixed-step RK4 over ``duration``; ``dt`` must divide it.

    The trace is not renormalised. A drift of trace or Hermiticity beyond
    ``tol`` raises IntegratorDivergence.
    """
    steps = int(round(duration / dt))
    if steps < 1 or abs(steps * dt - duration) > 1e-12 * max(1.0, duration):
        raise ConfigError(f"dt={dt} does not divide duration={duration}")
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    n_sites = rho.shape[0].bit_length() - 1
    gz, gp, gm = channels.gamma_z, channels.gamma_plus, channels.gamma_minus
    if isinstance(h_i, FlipOperator):
        out = _kernels.rk4_steps(rho, steps, dt, h_i.masks, h_i.coeffs.astype(float), h_i.diag.astype(float),
                                 n_sites, gz, gp, gm, _parity_block_diagonal(rho))
    else:
        out = rho.copy()
        for _ in range(steps):
            k1 = lindblad_rhs(out, h_i, channels)
            k2 = lindblad_rhs(out + 0.5 * dt * k1, h_i, channels)
            k3 = lindblad_rhs(out + 0.5 * dt * k2, h_i, channels)
            k4 = lindblad_rhs(out + dt * k3, h_i, channels)
            out = out + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegratorDivergence("non-finite density matrix")
    drift = abs(np.trace(out) - np.trace(rho))
    herm = float(np.max(np.abs(out - out.conj().T)))
    if drift > tol or herm > tol:
        raise IntegratorDivergence(f"trace drift {drift:.2e}, Hermiticity error {herm:.2e}")
    # RK4 conserves trace and Hermiticity exactly, so instability shows up as
    # growth of tr(rho^2) beyond its physical bound of 1
    purity = float(np.vdot(out, out).real)
    if purity > max(1.0, float(np.vdot(rho, rho).real)) + 1e-6:
        raise IntegratorDivergence(f"purity {purity:.3e} exceeds 1; step size too large")
    return out


def apply_kick(rho, h_k) -> np.ndarray:
    """Conjugation by the diagonal unitary ``exp(-i H_K)``."""
    u = np.exp(-1j * np.asarray(h_k, dtype=float))
    return np.asarray(rho) * u[:, None] * u.conj()[None, :]


def measure(rho, op, tol: float = 1e-10) -> float:
    """``tr(O rho)`` for a Hermitian ``O`` given as a diagonal, a matrix or a FlipOperator."""
    rho = np.asarray(rho)
    if isinstance(op, FlipOperator):
        val = np.trace(op @ rho)
    else:
        op = np.asarray(op)
        val = np.dot(op, np.diagonal(rho)) if op.ndim == 1 else np.einsum("ij,ji->", op, rho)
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ConsistencyError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)


@dataclass(eq=False)
class DenseTrajectory:
    """Energies, parities and optional ergotropies at ``t = m`` right after each kick."""

    energy: np.ndarray
    parity: np.ndarray
    ergotropy: np.ndarray | None = None
    states: list | None = None
    method: str = "rk4"
    dt: float | None = None
    meta: dict = field(default_factory=dict)


def dense_trajectory(n_sites: int, m_max: int, charger: Charger = SELF_DUAL,
                     thermal: ThermalParams = ThermalParams(), channels: DissipationChannels = DissipationChannels(),
                     dt: float = 1e-2, method: str = "auto", ergotropy: bool = False,
                     keep_states: bool = False) -> DenseTrajectory:
    """Alternate one unit of continuous evolution with an instantaneous kick.

    Parameters
    ----------
    method : {"auto", "rk4", "exact"}
        ``exact`` uses the eigendecomposition of ``H_I`` and requires all
        rates to vanish; ``auto`` picks it in that case and RK4 otherwise.
    ergotropy : bool
        Also record the ergotropy with respect to ``H_0`` at every kick.
    """
    from .ergotropy import ergotropy as _ergotropy

    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    if method == "auto":
        method = "exact" if channels.is_unitary else "rk4"
    if method == "exact" and not channels.is_unitary:
        raise ConfigError("exact propagation needs all dissipation rates to vanish")
    if method not in ("exact", "rk4"):
        raise ConfigError(f"unknown method {method!r}")
    ham = build_hamiltonians(n_sites, charger, thermal)
    rho = gibbs_state(ham.h_th, thermal.beta)
    if method == "exact":
        w, v = np.linalg.eigh(ham.h_i.to_dense())
        u_k = np.exp(-1j * ham.h_k)
        floquet = (u_k[:, None] * v) * np.exp(-1j * w)[None, :] @ v.conj().T

    energies, parities, works, states = [], [], [], []

    def record(r):
        energies.append(measure(r, ham.h_0))
        parities.append(measure(r, ham.parity))
        if ergotropy:
            works.append(_ergotropy(r, ham.h_0))
        if keep_states:
            states.append(r.copy())

    record(rho)
    for _ in range(m_max):
        if method == "exact":
            rho = floquet @ rho @ floquet.conj().T
            rho = 0.5 * (rho + rho.conj().T)
        else:
            rho = apply_kick(evolve_interval(rho, ham.h_i, channels, dt), ham.h_k)
        record(rho)
    return DenseTrajectory(
        np.array(energies), np.array(parities), np.array(works) if ergotropy else None,
        states if keep_states else None, method, dt if method == "rk4" else None,
        {"backend": _kernels.BACKEND, "sampling": "post-kick at integer t"},
    )


@dataclass(frozen=True)
class CoherenceTimes:
    t1: float
    t2: float
    t_phi: float


def coherence_times(channels: DissipationChannels) -> CoherenceTimes:
    """``T_phi = 1/(2 gamma_z)``, ``T1 = 1/(gamma_+ + gamma_-)``, ``1/T2 = 1/(2 T1) + 1/T_phi``.

    A vanishing rate gives an infinite time.
    """
    rate1 = channels.gamma_plus + channels.gamma_minus
    t1 = math.inf if rate1 == 0 else 1.0 / rate1
    t_phi = math.inf if channels.gamma_z == 0 else 1.0 / (2.0 * channels.gamma_z)
    rate2 = 0.5 * rate1 + 2.0 * channels.gamma_z
    t2 = math.inf if rate2 == 0 else 1.0 / rate2
    return CoherenceTimes(t1, t2, t_phi)


def thermal_t1(gamma0: float, beta: float, omega0: float = 1.0) -> float:
    """``T1`` from ``1/T1 = Gamma_0 coth(beta omega0 / 2)``."""
    if gamma0 <= 0:
        return math.inf
    coth = 1.0 if math.isinf(beta) else 1.0 / math.tanh(0.5 * beta * omega0)
    return 1.0 / (gamma0 * coth)
