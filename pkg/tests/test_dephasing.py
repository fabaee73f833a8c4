import functools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import I2, SPLUS, Z, ising_ring, parity_op
from kicked_qb.dense import (
    DissipationChannels,
    apply_kick,
    build_hamiltonians,
    dense_trajectory,
    evolve_interval,
    gibbs_state,
    lindblad_rhs,
    measure,
)
from kicked_qb.dephasing import (
    DephasingState,
    KickRotation,
    Variant,
    _initial_vectors,
    _pair_index,
    build_period_propagator,
    dephasing_trajectory,
    gibbs_mode_moments,
    ode_generator,
    rk4_propagate,
)
from kicked_qb.errors import DegenerateFunctionalError, StateValidityError
from kicked_qb.modes import Sector, build_grid
from kicked_qb.thermal import SELF_DUAL, Charger, ThermalParams, thermal_energy

# ----------------------------------------------------------------- oracles
#
# Jordan-Wigner fermions built from Kronecker products: c_j = Z ... Z S+_j,
# c_k = N^{-1/2} sum_j e^{ikj} c_j. With these phases the pair amplitude
# used by the moment equations is m_k = i <c_k c_{-k}>.


def fermion_momenta(n, ks):
    cs = [functools.reduce(np.kron, [Z] * j + [SPLUS] + [I2] * (n - j - 1)) for j in range(n)]
    return {k: sum(np.exp(1j * k * j) * cs[j] for j in range(n)) / math.sqrt(n) for k in ks}


def measure_moments(rho, grid, ops):
    x = np.zeros(grid.n_variables)
    n_idx, re, im, s_idx = _pair_index(grid)
    for i, k in enumerate(grid.pairs):
        c, cm = ops[k], ops[-k]
        x[n_idx[i]] = np.trace(rho @ c.conj().T @ c).real
        m = 1j * np.trace(rho @ c @ cm)
        x[re[i]], x[im[i]] = m.real, m.imag
    for i, k in enumerate(grid.self_modes):
        x[s_idx[i]] = np.trace(rho @ ops[k].conj().T @ ops[k]).real
    return x


def sector_state(n, sector, params, charger, kicks=2):
    """Parity-projected Gibbs state moved off equilibrium by a few exact periods."""
    proj = 0.5 * (np.eye(2**n) + sector.sign * parity_op(n))
    rho = proj @ expm(-params.beta * ising_ring(n, params.j_th, params.h_th)) @ proj
    rho /= np.trace(rho)
    ham = build_hamiltonians(n, charger, params)
    u = np.diag(np.exp(-1j * ham.h_k)) @ expm(-1j * ham.h_i.to_dense())
    for _ in range(kicks):
        rho = u @ rho @ u.conj().T
    return rho, ham


PAIR_TX = np.array([[0, 1], [1, 0]], dtype=complex)
PAIR_TZ = np.diag([1.0, -1.0]).astype(complex)


def pair_moments_oracle(k, p, parity_weighted):
    """(n, Re m) from the 4x4 pair Gibbs state; Fock order |00>, |11>, |10>, |01>."""
    eps = 2 * (p.j_th * math.cos(k) - p.h_th)
    delta = 2 * p.j_th * math.sin(k)
    h = np.diag([0.0, 2 * eps, eps, eps]).astype(complex)
    h[0, 1] = h[1, 0] = -delta
    rho = expm(-p.beta * h)
    if parity_weighted:
        rho = np.diag([1.0, 1.0, -1.0, -1.0]) @ rho
    z = np.trace(rho).real
    n_avg = np.diag([0.0, 1.0, 0.5, 0.5])  # (n_k + n_-k) / 2
    pair = np.zeros((4, 4))
    pair[0, 1] = 1.0  # |00><11|
    return np.trace(n_avg @ rho).real / z, np.trace(pair @ rho).real / z


# ------------------------------------------------ generator vs fermions


@pytest.mark.parametrize("n", [4, 5, 6])
@pytest.mark.parametrize("sector", [Sector.EVEN, Sector.ODD])
@pytest.mark.parametrize("gamma_z", [0.0, 0.13])
def test_generator_matches_lindblad_derivative(n, sector, gamma_z):
    charger = Charger(0.7, 0.3, 1.0)
    p = ThermalParams(0.6, 0.9, 1.3)
    grid = build_grid(n, sector)
    ops = fermion_momenta(n, list(grid.pairs) + [-k for k in grid.pairs] + list(grid.self_modes))
    rho, ham = sector_state(n, sector, p, charger)
    drho = lindblad_rhs(rho, ham.h_i, DissipationChannels(gamma_z=gamma_z))
    gen = ode_generator(grid, charger.j, gamma_z)
    x = measure_moments(rho, grid, ops)
    np.testing.assert_allclose(gen(x), measure_moments(drho, grid, ops), atol=1e-12)


@pytest.mark.parametrize("n", [4, 5])
@pytest.mark.parametrize("sector", [Sector.EVEN, Sector.ODD])
def test_kick_rotation_matches_conjugation(n, sector):
    charger = Charger(0.7, 0.3, 1.0)
    p = ThermalParams(0.6, 0.9, 1.3)
    grid = build_grid(n, sector)
    ops = fermion_momenta(n, list(grid.pairs) + [-k for k in grid.pairs] + list(grid.self_modes))
    rho, ham = sector_state(n, sector, p, charger)
    u = np.exp(-1j * ham.h_k)
    kicked = u[:, None] * rho * u.conj()[None, :]
    rot = KickRotation.from_kick(charger.b).matrix(grid)
    np.testing.assert_allclose(rot @ measure_moments(rho, grid, ops), measure_moments(kicked, grid, ops), atol=1e-12)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_initial_vectors_reproduce_projected_moments(n):
    p = ThermalParams(0.6, 0.9, 1.3)
    w = {}
    for grid, vectors in _initial_vectors(n, p):
        v = sum(s * x for s, x in vectors)
        ops = fermion_momenta(n, list(grid.pairs) + [-k for k in grid.pairs] + list(grid.self_modes))
        proj = 0.5 * (np.eye(2**n) + grid.sector.sign * parity_op(n))
        rho = proj @ expm(-p.beta * ising_ring(n, p.j_th, p.h_th)) @ proj
        w[grid.sector] = np.trace(rho).real
        rho /= np.trace(rho)
        np.testing.assert_allclose(v[:-1] / v[-1], measure_moments(rho, grid, ops), atol=1e-12)
        w[grid.sector] = (w[grid.sector], v[-1] / 2)
    total = sum(a for a, _ in w.values())
    for a, b in w.values():
        assert b == pytest.approx(a / total, abs=1e-12)


# ------------------------------------------------------- Gibbs moments


@pytest.mark.parametrize("k,beta", [(math.pi / 3, 0.8), (2.4, 3.0), (0.2, 12.0)])
def test_gibbs_moments_match_pair_traces(k, beta):
    p = ThermalParams(0.6, 0.9, beta)
    for variant, weighted in ((Variant.PLAIN, False), (Variant.PARITY_WEIGHTED, True)):
        n, re, im = gibbs_mode_moments(k, p, variant)
        n_ref, re_ref = pair_moments_oracle(k, p, weighted)
        assert n == pytest.approx(n_ref, abs=1e-12)
        assert re == pytest.approx(re_ref, abs=1e-12)
        assert im == 0.0


def test_gibbs_moments_limits():
    k = np.array([0.5, 2.0])
    n, re, _ = gibbs_mode_moments(k, ThermalParams(0.6, 0.9, 0.0))
    np.testing.assert_allclose(n, 0.5)
    np.testing.assert_allclose(re, 0.0)
    # beta = inf: the BdG vacuum, a pure pair state with |Bloch vector| = 1
    n, re, _ = gibbs_mode_moments(k, ThermalParams(0.6, 0.9, math.inf))
    np.testing.assert_allclose((1 - 2 * n) ** 2 + 4 * re**2, 1.0)
    # self-mode with eps(0) = -0.6 is a Fermi function
    n_self, _, _ = gibbs_mode_moments(0.0, ThermalParams(0.6, 0.9, 2.0), self_mode=True)
    assert n_self == pytest.approx(1.0 / (math.exp(-1.2) + 1.0))


def test_parity_weighted_moments_degenerate():
    with pytest.raises(DegenerateFunctionalError):
        gibbs_mode_moments(0.7, ThermalParams(0.6, 0.9, 0.0), Variant.PARITY_WEIGHTED)
    with pytest.raises(DegenerateFunctionalError):
        gibbs_mode_moments(0.0, ThermalParams(1.0, 1.0, 2.0), Variant.PARITY_WEIGHTED, self_mode=True)


# ------------------------------------------------------- generator algebra


def _random_moments(grid, rng):
    return rng.uniform(-0.5, 0.5, grid.n_variables) + np.where(np.arange(grid.n_variables) % 3 == 0, 0.5, 0.0)


def test_infinite_temperature_is_stationary():
    grid = build_grid(7, Sector.ODD)
    n_idx, _, _, s_idx = _pair_index(grid)
    x = np.zeros(grid.n_variables)
    x[n_idx] = x[s_idx] = 0.5
    np.testing.assert_allclose(ode_generator(grid, 0.9, 0.3)(x), 0.0, atol=1e-15)
    prop = build_period_propagator(ode_generator(grid, 0.9, 0.3), 1.0, KickRotation.from_kick(0.4))
    np.testing.assert_allclose(prop(x), x, atol=1e-14)


def test_dephasing_conserves_total_occupation(rng):
    grid = build_grid(8, Sector.ODD)
    gen = ode_generator(grid, 0.0, 0.2)
    n_idx, re, im, s_idx = _pair_index(grid)
    x = _random_moments(grid, rng)
    dx = gen(x)
    assert 2 * dx[n_idx].sum() + dx[s_idx].sum() == pytest.approx(0.0, abs=1e-14)
    # with J = 0 the coherences decay at 4 gamma_z
    np.testing.assert_allclose(dx[re], -0.8 * x[re])
    np.testing.assert_allclose(dx[im], -0.8 * x[im])


def test_bloch_norm_conserved_without_dephasing(rng):
    grid = build_grid(9, Sector.EVEN)
    n_idx, re, im, _ = _pair_index(grid)
    x = _random_moments(grid, rng)
    prop = build_period_propagator(ode_generator(grid, 0.77, 0.0), 1.0, KickRotation.from_kick(-0.3))

    def norm(v):
        return (1 - 2 * v[n_idx]) ** 2 + 4 * v[re] ** 2 + 4 * v[im] ** 2

    y = x
    for _ in range(25):
        y = prop(y)
    np.testing.assert_allclose(norm(y), norm(x), atol=1e-12)


def test_self_dual_kick_negates_pair_amplitudes():
    grid = build_grid(6, Sector.EVEN)
    rot = KickRotation.from_kick(-math.pi / 4).matrix(grid)
    n_idx, re, im, _ = _pair_index(grid)
    np.testing.assert_allclose(rot[n_idx, n_idx], 1.0)
    np.testing.assert_allclose(rot[re, re], -1.0)
    np.testing.assert_allclose(rot[im, im], -1.0)
    np.testing.assert_allclose(rot[re, im], 0.0, atol=1e-15)


@pytest.mark.parametrize("gamma_z", [0.0, 0.01, 0.3])
def test_propagator_matches_rk4(gamma_z, rng):
    grid = build_grid(7, Sector.ODD)
    gen = ode_generator(grid, 0.6, gamma_z)
    x = _random_moments(grid, rng)
    prop = build_period_propagator(gen, 1.0)
    np.testing.assert_allclose(prop(x), rk4_propagate(gen, x, 1.0, 1.0, 1e-4), atol=1e-12)


def test_propagator_is_affine(rng):
    grid = build_grid(6, Sector.ODD)
    prop = build_period_propagator(ode_generator(grid, 0.6, 0.05), 1.0, KickRotation.from_kick(0.2))
    x, y = _random_moments(grid, rng), _random_moments(grid, rng)
    a, b = 0.3, 0.7
    np.testing.assert_allclose(prop(a * x + b * y, a + b), a * prop(x) + b * prop(y), atol=1e-14)
    # the identity slot is carried through unchanged
    aug = prop.augmented()
    np.testing.assert_array_equal(aug[-1], np.eye(grid.n_variables + 1)[-1])


def test_generator_rejects_negative_rate():
    with pytest.raises(ValueError):
        ode_generator(build_grid(4, Sector.EVEN), 0.5, -0.1)


def test_state_container():
    grid = build_grid(5, Sector.EVEN)
    vals = np.array([0.2, 0.1, -0.05, 0.7, 0.0, 0.3, 0.4])
    st = DephasingState(grid, vals)
    np.testing.assert_array_equal(st.n, [0.2, 0.7])
    np.testing.assert_array_equal(st.re_m, [0.1, 0.0])
    np.testing.assert_array_equal(st.im_m, [-0.05, 0.3])
    np.testing.assert_array_equal(st.n_self, [0.4])
    st.check_bounds()
    # (g/2) [2 (1 - 0.4) + 2 (1 - 1.4) + (1 - 0.8)]
    assert st.energy(2.0) == pytest.approx(2 * 0.6 - 2 * 0.4 + 0.2)
    with pytest.raises(StateValidityError):
        DephasingState(grid, vals * np.r_[1, 1, 1, 1, 1, 1, 3.0]).check_bounds()
    with pytest.raises(ValueError):
        DephasingState(grid, vals[:-1])


# ------------------------------------------------------------ trajectories


@pytest.mark.parametrize("n", [4, 5, 8, 33])
@pytest.mark.parametrize("beta", [0.7, 3.0, math.inf])
def test_closed_limit_equals_thermal_energy(n, beta):
    p = ThermalParams(0.5, 1.0, beta)
    for charger in (SELF_DUAL, Charger(0.37, 1.1, 1.3)):
        np.testing.assert_allclose(dephasing_trajectory(n, 2 * n, charger, p, 0.0),
                                   thermal_energy(n, np.arange(2 * n + 1), charger, p), atol=1e-11)


def test_closed_limit_degenerate_ground_space():
    for n in (4, 5):
        p = ThermalParams(1.0, 0.0, math.inf)
        np.testing.assert_allclose(dephasing_trajectory(n, 8, SELF_DUAL, p, 0.0),
                                   thermal_energy(n, np.arange(9), SELF_DUAL, p), atol=1e-12)
        zero = ThermalParams(0.0, 0.0, math.inf)
        np.testing.assert_allclose(dephasing_trajectory(n, 8, SELF_DUAL, zero, 0.1), 0.0, atol=1e-14)


@pytest.mark.parametrize("n", [4, 5])
def test_matches_dense_lindblad(n):
    p = ThermalParams(0.5, 1.0, 2.0)
    charger = Charger(0.6, -0.3, 1.0)
    a = dephasing_trajectory(n, 6, charger, p, 0.05)
    d = dense_trajectory(n, 6, charger, p, DissipationChannels(gamma_z=0.05), dt=1e-3).energy
    np.testing.assert_allclose(a, d, atol=1e-9)


@pytest.mark.parametrize("n, beta", [(4, 0.7), (4, 2.0), (5, 2.0), (4, math.inf), (6, 1.3)])
def test_even_sector_matches_projected_dense(n, beta):
    p = ThermalParams(0.5, 1.0, beta)
    charger = Charger(0.6, -0.3, 1.0)
    ch = DissipationChannels(gamma_z=0.03)
    a = dephasing_trajectory(n, 5, charger, p, 0.03, sectors="even")
    ham = build_hamiltonians(n, charger, p)
    even = (ham.parity > 0).astype(float)
    rho = gibbs_state(ham.h_th, beta) * even[:, None] * even[None, :]
    rho /= np.trace(rho).real
    ref = [measure(rho, ham.h_0)]
    for _ in range(5):
        rho = apply_kick(evolve_interval(rho, ham.h_i, ch, dt=1e-3), ham.h_k)
        ref.append(measure(rho, ham.h_0))
    np.testing.assert_allclose(a, ref, atol=1e-9)


def test_even_sector_option_checks():
    with pytest.raises(ValueError):
        dephasing_trajectory(4, 2, sectors="odd")
    # odd-parity ground state has no even weight
    with pytest.raises(DegenerateFunctionalError):
        dephasing_trajectory(5, 2, SELF_DUAL, ThermalParams(0.5, 1.0, math.inf), 0.1, sectors="even")
    # H_th = 0 at zero temperature: both averages vanish
    e = dephasing_trajectory(4, 3, SELF_DUAL, ThermalParams(0.0, 0.0, math.inf), 0.1, sectors="even")
    np.testing.assert_array_equal(e, 0.0)


def test_rk4_method_agrees():
    p = ThermalParams(0.5, 1.0, 2.0)
    a = dephasing_trajectory(6, 5, SELF_DUAL, p, 0.02)
    b = dephasing_trajectory(6, 5, SELF_DUAL, p, 0.02, method="rk4", dt=1e-3)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_strong_dephasing_drives_energy_to_zero():
    e = dephasing_trajectory(8, 60, SELF_DUAL, ThermalParams(0.5, 1.0, 3.0), 0.5)
    assert abs(e[0]) > 1.0 and abs(e[-1]) < 1e-8


def test_trajectory_argument_checks():
    with pytest.raises(ValueError):
        dephasing_trajectory(4, -1)
    with pytest.raises(ValueError):
        dephasing_trajectory(4, 3, method="euler")
