import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtunnel.potentials import PotentialSpec
from qtunnel.semiclassical import (
    SemiclassicalInput,
    amplitude_semiclassical,
    large_T_slope,
    log_amplitude_semiclassical,
    log_sinh,
)
from qtunnel.spectral import default_grid, solve_spectrum, spectral_propagator


def _mp_amplitude(S0, T, w=1):
    mp.mp.dps = 40
    S0, T, w = mp.mpf(S0), mp.mpf(T), mp.mpf(w)
    rate = mp.sqrt(6 * S0 / mp.pi) * mp.exp(-S0 - mp.mpf(71) / (72 * S0)) * w
    return (mp.sqrt(w / mp.pi) * (1 + mp.mpf(3) / (8 * S0))
            * mp.exp(-(w * T / 2) * (1 - 1 / (3 * S0))) * mp.sinh(rate * T))


def test_reference_value():
    g = amplitude_semiclassical(SemiclassicalInput.for_lambda(1 / 32, 10.0))
    assert g == pytest.approx(1.06e-2, rel=0.01)
    assert g == pytest.approx(float(_mp_amplitude(mp.mpf(8) / 3, 10)), rel=1e-13)


@given(st.floats(0.5, 20.0), st.floats(0.01, 400.0), st.floats(0.2, 3.0))
def test_matches_high_precision(S0, T, w):
    got = log_amplitude_semiclassical(SemiclassicalInput(w, S0, T))
    ref = float(mp.log(_mp_amplitude(S0, T, w)))
    assert got == pytest.approx(ref, rel=1e-11, abs=1e-11)


def test_vanishes_as_T_goes_to_zero():
    vals = [amplitude_semiclassical(SemiclassicalInput.for_lambda(1 / 32, T))
            for T in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert vals[2] < 1e-7


@given(st.floats(1e-3, 700.0))
def test_log_sinh(z):
    assert log_sinh(z) == pytest.approx(float(mp.log(mp.sinh(z))), rel=1e-12, abs=1e-12)


def test_large_T_is_linear_in_T():
    inp = [SemiclassicalInput.for_lambda(0.02, T) for T in (400.0, 500.0)]
    slope = (log_amplitude_semiclassical(inp[1]) - log_amplitude_semiclassical(inp[0])) / 100
    assert slope == pytest.approx(large_T_slope(inp[0]), rel=1e-10)
    assert np.isfinite(log_amplitude_semiclassical(SemiclassicalInput.for_lambda(0.02, 1e5)))


@pytest.mark.parametrize("lam", [0.01, 0.015, 0.02])
def test_slope_tracks_ground_energy(lam):
    """-E_0 agrees with the large-T slope up to terms of order lambda^2."""
    p = PotentialSpec.symmetric(lam)
    e0 = solve_spectrum(p, default_grid(p), 2).energies[0]
    slope = large_T_slope(SemiclassicalInput.for_lambda(lam, 1.0))
    assert abs(e0 + slope) <= 30 * lam**2


def test_input_validation():
    with pytest.raises(ValueError):
        SemiclassicalInput(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        SemiclassicalInput(-1.0, 1.0, 1.0)


def _relative_error(lam, T=10.0):
    p = PotentialSpec.symmetric(lam)
    spec = solve_spectrum(p, default_grid(p), 20)
    a = p.geometry().a
    exact = spectral_propagator(spec, -a, a, T)
    return abs(amplitude_semiclassical(SemiclassicalInput.for_lambda(lam, T)) / exact - 1)


def test_accuracy_improves_toward_small_lambda():
    errs = [_relative_error(lam) for lam in (0.05, 0.04, 0.03, 0.02)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_within_twenty_percent_at_small_lambda():
    assert _relative_error(0.02) <= 0.20
