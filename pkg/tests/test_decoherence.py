import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from dephasing_geometry.decoherence import (
    DegenerateModesError, ModeDecomposition, UndersampledPhaseError, coherence_series,
    cubic_roots, decompose, denominator_coeffs, evaluate_dF, evaluate_F, make_factor,
    shift_and_rate, unwrap_phase,
)
from dephasing_geometry.model import NoiseParams, uniform_grid
from dephasing_geometry.oracles import OdeFactor, closed_form_markov_F

from conftest import A_VALUES, params

rates = st.floats(0.05, 10.0)
noise_params = st.builds(NoiseParams, nu=rates, lam=rates, kappa=rates, a=st.floats(-1, 1))


def companion_roots(c2, c1, c0):
    m = np.array([[-c2, -c1, -c0], [1, 0, 0], [0, 1, 0]], dtype=float)
    return np.linalg.eigvals(m)


def match(a, b):
    """Max distance after pairing roots greedily."""
    b = list(b)
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(j)))
    return worst


# cubic roots -----------------------------------------------------------------

def test_cubic_factorizable():
    r = cubic_roots(1, 1, 1)
    assert match(r, [-1, 1j, -1j]) < 1e-14


def test_cubic_static_noise_factorization():
    c = denominator_coeffs(NoiseParams(nu=2, lam=0, kappa=1, a=0.3))
    assert match(cubic_roots(*c), [-1, 2j, -2j]) < 1e-13


def test_cubic_nonmarkov_region_vs_companion():
    c = denominator_coeffs(NoiseParams(nu=2, lam=1, kappa=1))
    assert c == pytest.approx((1, 6, 4))
    r = cubic_roots(*c)
    assert match(r, companion_roots(*c)) < 1e-12
    assert np.all(np.abs(np.polyval([1, *c], r)) <= 1e-10 * np.maximum(1, np.abs(r) ** 3))


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_cubic_residual_and_conjugates(c2, c1, c0):
    r = cubic_roots(c2, c1, c0)
    assert np.all(np.abs(np.polyval([1, c2, c1, c0], r)) <= 1e-10 * np.maximum(1, np.abs(r) ** 3))
    complex_roots = r[np.abs(r.imag) > 0]
    assert match(complex_roots, np.conj(complex_roots)) == 0.0


# residues --------------------------------------------------------------------

def _moment_errors(m: ModeDecomposition):
    p = m.params
    expected = [1.0, 1j * p.a * p.nu, -p.nu**2]
    errs = []
    for k, e in enumerate(expected):
        terms = m.residues * m.roots**k
        errs.append(abs(terms.sum() - e) / max(1.0, np.sum(np.abs(terms))))
    return errs


@settings(max_examples=300)
@given(noise_params)
def test_residue_sum_rules(p):
    m = decompose(p)
    assume(not m.degenerate)
    assert max(_moment_errors(m)) < 1e-10


def test_static_noise_residues():
    m = decompose(NoiseParams(nu=2, lam=0, kappa=1, a=1))
    for root, res in zip(m.roots, m.residues):
        expected = 1.0 if abs(root - 2j) < 1e-9 else 0.0
        assert abs(res - expected) < 1e-12


@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
def test_equilibrium_modes_closed_under_conjugation(regime):
    m = decompose(params(regime, a=0))
    assert match(m.roots, np.conj(m.roots)) < 1e-14
    pairs = {complex(r): complex(q) for r, q in zip(m.roots, m.residues)}
    for r, q in pairs.items():
        partner = min(pairs, key=lambda x: abs(x - np.conj(r)))
        assert abs(pairs[partner] - np.conj(q)) < 1e-13


def test_infinite_kappa_refused():
    with pytest.raises(ValueError):
        decompose(NoiseParams(1, 1, math.inf))


# evaluation --------------------------------------------------------------------

@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
@pytest.mark.parametrize("a", A_VALUES)
def test_initial_values(regime, a):
    p = params(regime, a)
    m = decompose(p)
    assert abs(evaluate_F(m, 0.0) - 1) < 1e-12
    assert abs(evaluate_dF(m, 0.0) - 1j * a * p.nu) < 1e-10 * max(1, p.nu)


def test_dF0_example():
    m = decompose(NoiseParams(nu=2, lam=1, kappa=1, a=1))
    assert abs(evaluate_dF(m, 0.0) - 2j) < 1e-10


def test_static_noise_closed_forms():
    t = np.linspace(0, 20, 401)
    m = decompose(NoiseParams(nu=2, lam=0, kappa=1, a=1))
    assert np.max(np.abs(m.F(t) - np.exp(2j * t))) < 1e-9
    assert np.max(np.abs(m.dF(t) - 2j * np.exp(2j * t))) < 1e-9
    m0 = decompose(NoiseParams(nu=2, lam=0, kappa=1, a=0))
    assert np.max(np.abs(m0.F(t) - np.cos(2 * t))) < 1e-9


def test_near_markov_mode_sum_vs_closed_form():
    p = NoiseParams(nu=0.5, lam=1, kappa=1e6)
    expected = closed_form_markov_F(p.replace(kappa=math.inf), 1.0)
    om = math.sqrt(1 - 0.25)
    assert expected == pytest.approx(math.exp(-1) * (math.cosh(om) + math.sinh(om) / om), abs=1e-14)
    assert abs(decompose(p).F(1.0) - expected) < 1e-5


@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
def test_equilibrium_factor_real(regime):
    t = uniform_grid(15, 1501).samples
    assert np.max(np.abs(decompose(params(regime)).F(t).imag)) < 1e-10


def test_negative_time_refused():
    with pytest.raises(ValueError):
        decompose(NoiseParams(1, 1, 1)).F(-0.1)


@settings(max_examples=100)
@given(noise_params)
def test_modulus_bound_and_conjugation(p):
    m = decompose(p)
    assume(not m.degenerate)
    t = np.linspace(0, 15 / max(p.lam, 0.2), 301)
    F = m.F(t)
    assert np.max(np.abs(F)) <= 1 + 1e-9
    mirror = decompose(p.replace(a=-p.a))
    assume(not mirror.degenerate)
    assert np.max(np.abs(mirror.F(t) - np.conj(F))) < 1e-10


@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
@pytest.mark.parametrize("a", [0.5, -1.0])
def test_derivative_by_central_differences(regime, a):
    m = decompose(params(regime, a))
    t = np.linspace(0.5, 10, 20)
    errs = []
    for h in (1e-3, 1e-4):
        fd = (m.F(t + h) - m.F(t - h)) / (2 * h)
        errs.append(np.max(np.abs(fd - m.dF(t))))
    assert 80 < errs[0] / errs[1] < 120


@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
def test_rate_is_log_derivative(regime):
    m = decompose(params(regime, 0.5))
    t = np.linspace(0.3, 12, 60)
    h = 1e-5
    s, gamma, nz = shift_and_rate(m.F(t), m.dF(t))
    fd = -(np.log(np.abs(m.F(t + h))) - np.log(np.abs(m.F(t - h)))) / (2 * h)
    assert not nz.any()
    assert np.max(np.abs(gamma - fd)) < 1e-6
    # s is minus the derivative of the phase
    dphi = (np.angle(m.F(t + h) / m.F(t - h))) / (2 * h)
    assert np.max(np.abs(s + dphi)) < 1e-6


@pytest.mark.parametrize("regime", ["markov", "nonmarkov"])
def test_shift_rate_symmetry(regime):
    t = np.linspace(0, 15, 301)
    mp, mm = decompose(params(regime, 0.5)), decompose(params(regime, -0.5))
    sp, gp, _ = shift_and_rate(mp.F(t), mp.dF(t))
    sm, gm, _ = shift_and_rate(mm.F(t), mm.dF(t))
    assert np.max(np.abs(sp + sm)) < 1e-8
    assert np.max(np.abs(gp - gm)) < 1e-8
    assert sp[0] == pytest.approx(-0.5 * params(regime).nu, abs=1e-10)
    assert gp[0] == pytest.approx(0.0, abs=1e-10)


def test_shift_rate_flags_zero():
    s, gamma, nz = shift_and_rate(np.array([1.0, 0.0]), np.array([0.5j, -1 + 2j]))
    assert list(nz) == [False, True]
    assert s[1] == -np.inf and gamma[1] == np.inf


# phase unwrapping --------------------------------------------------------------

def test_unwrap_static_noise_is_linear():
    t = np.linspace(0, 20, 2001)
    assert np.max(np.abs(unwrap_phase(np.exp(1.5j * t)) - 1.5 * t)) < 1e-12


def test_unwrap_constant():
    assert np.all(unwrap_phase(np.ones(10)) == 0)


def test_unwrap_real_zero_crossings():
    # memoryless nu = 2 lambda factor changes sign at tan(w t) = -w / lambda
    p = NoiseParams(nu=2, lam=1, kappa=math.inf)
    w = math.sqrt(3)
    t = np.linspace(0, 8, 801)
    F = closed_form_markov_F(p, t)
    phi = unwrap_phase(F)
    first_zero = (math.pi - math.atan(w)) / w
    assert np.all(phi[t < first_zero] == 0)
    assert set(np.round(phi / math.pi, 12)) <= {0.0, 1.0}
    assert np.array_equal(phi == math.pi, F < 0)


def test_unwrap_refuses_undersampled():
    F = np.exp(1j * np.array([0.0, 0.1, 0.1 + math.pi]))
    with pytest.raises(UndersampledPhaseError) as exc:
        unwrap_phase(F)
    assert exc.value.index == 1


def test_coherence_series_consistency():
    m = decompose(params("nonmarkov", 0.5))
    c = coherence_series(m, uniform_grid(15, 1501))
    assert c.phi[0] == 0
    assert np.max(np.abs(c.absF * np.exp(1j * c.phi) - c.F)) < 1e-12
    assert np.all(c.absF <= 1 + 1e-9)


# degenerate roots ----------------------------------------------------------------

def test_triple_root_routes_to_ode():
    # D(p) = (p + 3)^3 and F(t) = exp(-3t) (1 + 3t + 3t^2)
    p = NoiseParams(nu=math.sqrt(3), lam=4 / 3, kappa=9)
    m = decompose(p)
    assert m.degenerate
    with pytest.raises(DegenerateModesError):
        m.F(1.0)
    f = make_factor(p, t_max=10)
    assert isinstance(f, OdeFactor)
    t = np.linspace(0, 10, 101)
    assert np.max(np.abs(f.F(t) - np.exp(-3 * t) * (1 + 3 * t + 3 * t**2))) < 1e-8


def test_noiseless_double_root():
    f = make_factor(NoiseParams(nu=0, lam=0, kappa=1), t_max=5)
    assert np.max(np.abs(f.F(np.linspace(0, 5, 11)) - 1)) < 1e-12


def test_degenerate_without_horizon():
    with pytest.raises(DegenerateModesError):
        make_factor(NoiseParams(nu=math.sqrt(3), lam=4 / 3, kappa=9))
