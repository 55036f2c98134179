import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dephasing_geometry.decoherence import make_factor
from dephasing_geometry.dynamics import BlochState, evolve_analytic, evolve_ode, path_length, spectral
from dephasing_geometry.model import NoiseParams, SystemConfig, uniform_grid

from conftest import A_VALUES, params

GRID = uniform_grid(15, 1501)
NOISELESS = NoiseParams(nu=0, lam=1, kappa=1)


def factor(p, grid=GRID):
    return make_factor(p, grid.t_max)


def test_unitary_rotation():
    # r_x + i r_y = (r_x(0) + i r_y(0)) exp(i omega0 t) F(t); see notes on the sign
    g = uniform_grid(2 * math.pi, 629)
    tr = evolve_analytic(factor(NOISELESS, g), SystemConfig(omega0=1.0), g)
    expected = np.stack([np.cos(g.samples), np.sin(g.samples), np.zeros(g.n_samples)], axis=1)
    assert np.max(np.abs(tr.r - expected)) < 1e-12


def test_ground_and_excited_fixed():
    for theta, rz in ((0.0, 1.0), (math.pi, -1.0)):
        tr = evolve_analytic(factor(params("nonmarkov", 1)), SystemConfig(omega0=1.0, theta=theta), GRID)
        assert np.allclose(tr.r[:, :2], 0, atol=1e-15) and np.all(tr.r[:, 2] == rz)
        assert np.max(tr.length) <= (0 if theta == 0 else 1e-14)


@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
def test_equilibrium_transverse_is_F(regime):
    f = factor(params(regime))
    tr = evolve_analytic(f, SystemConfig(), GRID)
    assert np.max(np.abs(tr.r[:, 0] - f.F(GRID.samples).real)) < 1e-15
    assert np.max(np.abs(tr.r[:, 1])) < 1e-10


@pytest.mark.parametrize("nu", [0.5, 2.0])
@pytest.mark.parametrize("kappa", [0.5, 1.0, 10.0])
@pytest.mark.parametrize("a", A_VALUES)
def test_analytic_vs_ode(nu, kappa, a):
    p = NoiseParams(nu=nu, lam=1, kappa=kappa, a=a)
    f = factor(p)
    cfg = SystemConfig(omega0=1.0, theta=math.pi / 3)
    ta, to = evolve_analytic(f, cfg, GRID), evolve_ode(f, cfg, GRID)
    assert np.max(np.abs(ta.r - to.r)) < 1e-6
    assert np.max(np.abs(to.r[:, 2] - math.cos(math.pi / 3))) < 1e-12


def test_ode_uses_bloch_equations_when_far_from_zero():
    f = factor(params("markov", 0.5))
    assert evolve_ode(f, SystemConfig(omega0=1.0), GRID).method == "bloch-ode"


def test_ode_switches_near_zero_of_F():
    f = factor(params("nonmarkov"))
    assert evolve_ode(f, SystemConfig(), GRID).method == "coherence-ode"


def test_noiseless_ode_conserves_length():
    g = uniform_grid(2 * math.pi, 629)
    to = evolve_ode(factor(NOISELESS, g), SystemConfig(omega0=1.0), g)
    assert np.max(np.abs(np.linalg.norm(to.r, axis=1) - 1)) < 1e-9


def test_equilibrium_markov_region_purity_decreases():
    tr = evolve_analytic(factor(params("markov")), SystemConfig(omega0=1.0), GRID)
    norm = np.linalg.norm(tr.r, axis=1)
    assert np.all(np.diff(norm) <= 0)
    assert np.all(np.diff(tr.spectral.eps_plus) <= 0)


def test_r_z_conserved_and_inside_ball():
    f = factor(params("nonmarkov", -0.5))
    cfg = SystemConfig(omega0=0.7, r0=(0.3, -0.4, 0.6))
    for tr in (evolve_analytic(f, cfg, GRID), evolve_ode(f, cfg, GRID)):
        assert np.max(np.abs(tr.r[:, 2] - 0.6)) < 1e-12
        assert np.all(np.linalg.norm(tr.r, axis=1) <= 1 + 1e-9)
        assert np.all(np.diff(tr.length) >= 0)


# spectral decomposition ----------------------------------------------------------

def test_pure_state_at_start():
    sp = spectral(SystemConfig(theta=1.1).initial_bloch)
    assert sp.eps_plus == pytest.approx(1) and sp.eps_minus == pytest.approx(0, abs=1e-15)


def test_eigenvalue_example():
    assert spectral([0.5, 0, 0]).eps_plus == 0.75


def test_pure_state_eigenvalue_formula():
    theta, absF = 1.0, 0.37
    sp = spectral(BlochState(math.sin(theta) * absF, 0.0, math.cos(theta), t=0.0))
    assert sp.eps_plus == pytest.approx(0.5 * (1 + math.sqrt(math.cos(theta) ** 2 + math.sin(theta) ** 2 * absF**2)))


def test_poles():
    south = spectral([0, 0, -1])
    assert south.C_plus_e == 0 and south.C_plus_g == 1
    north = spectral([0, 0, 1])
    assert north.C_plus_e == 1 and north.C_plus_g == 0
    centre = spectral([0, 0, 0])
    assert centre.eps_plus == centre.eps_minus == 0.5


def density(r):
    x, y, z = r
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


bloch_vectors = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: np.linalg.norm(v) <= 1)


@given(bloch_vectors)
def test_spectral_decomposition_properties(r):
    sp = spectral(r)
    assert sp.eps_plus + sp.eps_minus == 1.0
    assert sp.eps_plus >= sp.eps_minus >= -1e-16
    plus = np.array([sp.C_plus_e, sp.C_plus_g])
    minus = np.array([sp.C_minus_e, sp.C_minus_g])
    assert abs(np.vdot(plus, plus) - 1) < 1e-12 and abs(np.vdot(minus, minus) - 1) < 1e-12
    assert abs(np.vdot(plus, minus)) < 1e-10
    rho = density(r)
    assert np.allclose(rho @ plus, sp.eps_plus * plus, atol=1e-12)
    assert np.allclose(rho @ minus, sp.eps_minus * minus, atol=1e-12)
    assert math.cos(sp.theta_plus) ** 2 + math.sin(sp.theta_plus) ** 2 == pytest.approx(1, abs=1e-10)


# path length ---------------------------------------------------------------------

def test_unit_circle_length():
    g = uniform_grid(2 * math.pi, 401)
    tr = evolve_analytic(factor(NOISELESS, g), SystemConfig(omega0=1.0), g)
    assert tr.length[0] == 0
    assert tr.length[-1] == pytest.approx(2 * math.pi, abs=1e-7)


def test_richardson_beats_chord_sum():
    t = np.linspace(0, 2 * math.pi, 101)
    r = np.stack([np.cos(t), np.sin(t), 0 * t], axis=1)
    chords = np.sum(np.linalg.norm(np.diff(r, axis=0), axis=1))
    assert abs(path_length(r)[-1] - 2 * math.pi) < 0.01 * abs(chords - 2 * math.pi)


def test_odd_step_count():
    t = np.linspace(0, math.pi, 100)
    r = np.stack([np.cos(t), np.sin(t), 0 * t], axis=1)
    L = path_length(r)
    assert np.all(np.diff(L) >= 0) and L[-1] == pytest.approx(math.pi, abs=1e-6)


@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
def test_noise_asymmetry_lengthens_path(regime):
    g = uniform_grid(10, 1001)
    L = {a: evolve_analytic(factor(params(regime, a), g), SystemConfig(), g).length[-1] for a in (0, 1)}
    assert L[1] > L[0]
