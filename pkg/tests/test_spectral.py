import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import numerov_richardson

from qtunnel.potentials import PotentialSpec, harmonic
from qtunnel.spectral import (
    GridSpec,
    SpectralError,
    default_grid,
    ground_state_log_derivative,
    propagator_matrix,
    richardson,
    solve_spectrum,
    spectral_propagator,
)

DW = PotentialSpec.symmetric(1 / 32)


@pytest.fixture(scope="module")
def dw_spec(dw32):
    return dw32.source


def test_ground_state_below_barrier_on_narrow_grid():
    # only E0 is asked for; the narrow window is too tight for the wall check
    spec = solve_spectrum(DW, GridSpec(-6, 6, 2001), 4, check_levels=0)
    assert spec.energies[0] < 0.5
    assert spec.energies[1] > spec.energies[0]


def test_harmonic_levels():
    spec = solve_spectrum(harmonic(), GridSpec(-8, 8, 8001), 4)
    assert spec.energies[0] == pytest.approx(0.5, abs=1e-6)
    assert spec.energies[1] == pytest.approx(1.5, abs=1e-6)


def test_double_well_levels_match_numerov_shooting():
    e0 = numerov_richardson(DW.value, "even", 0.3, 0.45)
    e1 = numerov_richardson(DW.value, "odd", 0.45, 0.7)
    g = default_grid(DW)
    coarse = solve_spectrum(DW, g, 4).energies[:2]
    fine = solve_spectrum(DW, g.refined(), 4).energies[:2]
    assert fine == pytest.approx([e0, e1], rel=1e-6)
    assert richardson(coarse, fine) == pytest.approx([e0, e1], rel=1e-8)


def test_eigenvalues_converge_quadratically():
    g = GridSpec(-7.5, 7.5, 1251)
    e = [solve_spectrum(DW, gg, 2).energies[0] for gg in (g, g.refined(), g.refined(4))]
    ratio = (e[0] - e[1]) / (e[1] - e[2])
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_normalized_and_orthogonal(dw_spec):
    assert dw_spec.overlap(0, 0) == pytest.approx(1.0, abs=1e-12)
    assert dw_spec.overlap(0, 1) == pytest.approx(0.0, abs=1e-10)
    assert np.all(dw_spec.ground_state[1:-1] > 0)


def test_parity(dw_spec):
    psi = dw_spec.wavefunctions
    assert np.max(np.abs(psi[0] - psi[0][::-1])) <= 1e-8
    assert np.max(np.abs(psi[1] + psi[1][::-1])) <= 1e-8


def test_narrow_grid_rejected():
    with pytest.raises(SpectralError, match="too narrow"):
        solve_spectrum(DW, GridSpec(-3, 3, 601), 4)


def test_grid_parse_and_validation():
    assert GridSpec.parse("-6,6,2001") == GridSpec(-6.0, 6.0, 2001)
    with pytest.raises(SpectralError):
        GridSpec(1, 0, 10)
    with pytest.raises(SpectralError):
        GridSpec(0, 1, 2)


@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(0.5, 50))
def test_propagator_symmetric(dw_spec, x, y, T):
    assert spectral_propagator(dw_spec, x, y, T, tol=1) == pytest.approx(
        spectral_propagator(dw_spec, y, x, T, tol=1), rel=1e-12)


def test_feynman_kac_limit(dw_spec):
    pts = np.linspace(-2, 2, 9)
    G = propagator_matrix(dw_spec, pts, 100.0)
    psi = dw_spec.psi(0, pts)
    fk = np.outer(psi, psi) * np.exp(-dw_spec.energies[0] * 100)
    assert np.max(np.abs(G / fk - 1)) <= 1e-6
    assert (dw_spec.energies[1] - dw_spec.energies[0]) * 100 > 15


def test_tunneling_amplitude_richardson_consistent():
    g = GridSpec(-7.5, 7.5, 1251)
    vals = [spectral_propagator(solve_spectrum(DW, gg, 20), -2, 2, 10.0)
            for gg in (g, g.refined(), g.refined(4))]
    r1, r2 = richardson(vals[0], vals[1]), richardson(vals[1], vals[2])
    assert abs(r1 / r2 - 1) < 1e-7
    assert abs(vals[2] / r2 - 1) < 1e-5


def test_semigroup():
    pot = PotentialSpec.symmetric(0.1)
    spec = solve_spectrum(pot, GridSpec(-6, 6, 1201), 30)
    x = spec.grid.x
    w = spec.grid.weights
    T1, T2 = 0.7, 1.3
    a = spectral_propagator(spec, -0.8, x, T1, tol=1)
    b = spectral_propagator(spec, x, 1.1, T2, tol=1)
    direct = spectral_propagator(spec, -0.8, 1.1, T1 + T2, tol=1)
    assert np.sum(w * a * b) == pytest.approx(direct, rel=1e-6)


def test_propagator_errors(dw_spec):
    with pytest.raises(SpectralError):
        spectral_propagator(dw_spec, 0, 0, 0.0)
    with pytest.raises(SpectralError, match="tail"):
        spectral_propagator(dw_spec, 0, 0, 0.01)
    with pytest.raises(SpectralError):
        spectral_propagator(dw_spec, 0, 100, 1.0)


def test_log_derivative_harmonic():
    spec = solve_spectrum(harmonic(), GridSpec(-8, 8, 8001), 2)
    g = ground_state_log_derivative(spec)
    inner = np.abs(spec.x) < 5
    assert np.max(np.abs(g[inner] + spec.x[inner])) <= 1e-4


def test_log_derivative_parity(dw_spec):
    g = ground_state_log_derivative(dw_spec)
    c = len(g) // 2
    assert dw_spec.x[c] == 0.0
    assert abs(g[c]) <= 1e-8
    assert np.max(np.abs(g + g[::-1])) <= 1e-8


def test_log_derivative_rejects_sign_flip(dw_spec):
    from qtunnel.spectral import SpectralData

    bad = SpectralData(dw_spec.grid, dw_spec.energies, -dw_spec.wavefunctions, 1.0)
    with pytest.raises(SpectralError):
        ground_state_log_derivative(bad)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0])
def test_mass_potential_scaling(alpha):
    """(m, V, T) -> (m/alpha, alpha V, T/alpha) leaves G unchanged."""
    g = GridSpec(-7.5, 7.5, 1501)
    base = solve_spectrum(DW, g, 20)
    scaled_pot = PotentialSpec.polynomial(alpha * DW.coefficients())
    direct = solve_spectrum(scaled_pot, g, 20, mass=1 / alpha)
    for T in (10.0, 100.0):
        ref = spectral_propagator(base, -2, 2, T)
        assert spectral_propagator(base.scaled(alpha), -2, 2, T / alpha) == pytest.approx(ref, rel=1e-8)
        assert spectral_propagator(direct, -2, 2, T / alpha) == pytest.approx(ref, rel=1e-8)
