"""Momentum-space kinematics of the kicked Ising chain.

After Jordan-Wigner and Fourier transformation the periodic chain splits into
independent ``(k, -k)`` pairs. Each pair evolves inside the two-dimensional
span of ``|0_k 0_-k>`` and ``|1_k 1_-k>`` under a 2x2 Floquet unitary, whose
m-th power is available in closed form through Chebyshev polynomials of the
second kind. Momenta are canonicalised to ``0 < k < pi``; the unpaired momenta
``0`` and ``pi`` ("self-modes") are carried separately.

All functions broadcast over numpy arrays of momenta.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSizeError

__all__ = [
    "Sector",
    "ModeGrid",
    "BdGParams",
    "FloquetMode",
    "EvolvedObservable",
    "build_grid",
    "bdg_params",
    "floquet_one_kick",
    "floquet_power",
    "chebyshev_u",
    "evolved_observable",
]


class Sector(enum.Enum):
    """Fermion-parity sector; ``value`` is the momentum offset ``p``."""

    EVEN = 1  # antiperiodic fermions
    ODD = 0  # periodic fermions

    @property
    def sign(self) -> int:
        return 1 if self is Sector.EVEN else -1


@dataclass(frozen=True, eq=False)
class ModeGrid:
    """Canonical momenta of one parity sector of an ``n_sites`` ring.

    Attributes
    ----------
    n_sites : int
    sector : Sector
    pairs : np.ndarray
        Sorted representatives ``k`` of the ``(k, 2*pi - k)`` pairs, all in
        ``(0, pi)``.
    self_modes : np.ndarray
        The subset of ``{0, pi}`` present in the sector.
    """

    n_sites: int
    sector: Sector
    pairs: np.ndarray
    self_modes: np.ndarray

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def n_self(self) -> int:
        return len(self.self_modes)

    @property
    def n_variables(self) -> int:
        """Length of a dephasing moment vector on this grid."""
        return 3 * self.n_pairs + self.n_self


def build_grid(n_sites: int, sector: Sector) -> ModeGrid:
    """Momenta ``(2n + p) pi / N`` folded onto pairs and self-modes."""
    if int(n_sites) != n_sites or n_sites < 2:
        raise InvalidSizeError(f"need an integer n_sites >= 2, got {n_sites!r}")
    n_sites = int(n_sites)
    sector = Sector(sector)
    # work with integer multiples of pi/N to keep the folding exact
    num = (2 * np.arange(n_sites) + sector.value) % (2 * n_sites)
    pair_num = np.sort(num[(num > 0) & (num < n_sites)])
    self_num = np.sort(num[(num == 0) | (num == n_sites)])
    pairs = pair_num * np.pi / n_sites
    self_modes = self_num * np.pi / n_sites
    pairs.setflags(write=False)
    self_modes.setflags(write=False)
    return ModeGrid(n_sites, sector, pairs, self_modes)


@dataclass(frozen=True, eq=False)
class BdGParams:
    """Single-mode Bogoliubov-de Gennes energies of ``J sum xx + h sum z``."""

    epsilon: np.ndarray
    delta: np.ndarray
    energy: np.ndarray


def bdg_params(k, j: float, h: float) -> BdGParams:
    """``epsilon = 2 (j cos k - h)``, ``delta = 2 j sin k``, ``energy = hypot``."""
    k = np.asarray(k, dtype=float)
    eps = 2.0 * (j * np.cos(k) - h)
    delta = 2.0 * j * np.sin(k)
    return BdGParams(eps, delta, np.hypot(eps, delta))


@dataclass(frozen=True, eq=False)
class FloquetMode:
    """SU(2) element ``[[alpha, -conj(beta)], [beta, conj(alpha)]]``.

    For one kick this is ``exp(2iJ(cos k tz + sin k tx)) exp(-2ib tz)``, i.e.
    ``alpha`` is the lower-right and ``beta`` the lower-left entry of
    ``exp(2ib tz) exp(-2iJ(cos k tz - sin k tx))``.
    """

    alpha: np.ndarray
    beta: np.ndarray

    @property
    def xi(self) -> np.ndarray:
        return np.real(self.alpha)

    @property
    def sin_theta(self) -> np.ndarray:
        # 1 - xi^2 = Im(alpha)^2 + |beta|^2, accurate even when theta ~ 0
        return np.hypot(np.imag(self.alpha), np.abs(self.beta))

    @property
    def theta(self) -> np.ndarray:
        return np.arctan2(self.sin_theta, self.xi)

    def matrix(self) -> np.ndarray:
        """Stacked 2x2 matrices, shape ``alpha.shape + (2, 2)``."""
        a = np.asarray(self.alpha, dtype=complex)
        b = np.asarray(self.beta, dtype=complex)
        out = np.empty(a.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = a
        out[..., 0, 1] = -np.conj(b)
        out[..., 1, 0] = b
        out[..., 1, 1] = np.conj(a)
        return out

    @classmethod
    def identity(cls, shape=()) -> "FloquetMode":
        return cls(np.ones(shape, dtype=complex), np.zeros(shape, dtype=complex))


def floquet_one_kick(k, j: float, b: float) -> FloquetMode:
    """One period of Ising evolution followed by a kick, for momentum ``k``."""
    k = np.asarray(k, dtype=float)
    phase = np.exp(-2j * b)
    s2j = np.sin(2.0 * j)
    alpha = phase * (np.cos(2.0 * j) + 1j * s2j * np.cos(k))
    beta = 1j * phase * s2j * np.sin(k)
    return FloquetMode(alpha, beta)


def chebyshev_u(n, sin_theta, xi):
    """Chebyshev ``U_n(xi)`` for integer ``n >= -2``, with ``sin_theta = sqrt(1 - xi^2)``.

    The angle is reduced to ``[0, pi/2]`` through ``U_n(-x) = (-1)^n U_n(x)``:
    near ``xi = -1`` the full angle ``theta ~ pi`` carries an absolute rounding
    error comparable to ``sin theta`` itself, while the reduced angle is exact
    to relative precision. Where ``sin theta`` vanishes the polynomial limit
    ``U_n(1) = n + 1`` is used.
    """
    n = np.asarray(n)
    sin_theta = np.asarray(sin_theta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    reduced = np.arctan2(sin_theta, np.abs(xi))
    degenerate = sin_theta == 0.0
    safe = np.where(degenerate, 1.0, sin_theta)
    value = np.where(degenerate, n + 1, np.sin((n + 1) * reduced) / safe)
    parity = np.where((xi < 0) & (n % 2 == 1), -1.0, 1.0)
    return parity * value


def floquet_power(mode: FloquetMode, m) -> FloquetMode:
    """m-th power of a Floquet mode via Chebyshev polynomials.

    ``alpha(m) = alpha U_{m-1}(xi) - U_{m-2}(xi)`` and
    ``beta(m) = beta U_{m-1}(xi)`` with ``xi = Re alpha``. ``m`` may be an
    integer array broadcasting against the mode's shape.
    """
    m = np.asarray(m)
    if np.any(m < 0):
        raise ValueError("floquet_power needs m >= 0")
    st, xi = mode.sin_theta, mode.xi
    u1 = chebyshev_u(m - 1, st, xi)
    u2 = chebyshev_u(m - 2, st, xi)
    return FloquetMode(mode.alpha * u1 - u2, mode.beta * u1)


@dataclass(frozen=True, eq=False)
class EvolvedObservable:
    """Coefficients of ``U^dag tz U = c_z tz + c_x tx + c_y ty``."""

    c_z: np.ndarray
    c_x: np.ndarray
    c_y: np.ndarray


def evolved_observable(mode_m: FloquetMode) -> EvolvedObservable:
    ab = mode_m.alpha * mode_m.beta
    return EvolvedObservable(
        1.0 - 2.0 * np.abs(mode_m.beta) ** 2,
        -2.0 * np.real(ab),
        -2.0 * np.imag(ab),
    )
