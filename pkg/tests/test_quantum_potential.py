import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtunnel.potentials import PotentialSpec
from qtunnel.quantum_potential import (
    QuantumPotentialError,
    build_quantum_potential,
    classify,
    find_regime_boundary,
)
from qtunnel.spectral import default_grid, solve_spectrum

LAMBDA_STAR = 5.34581336e-2


def _extrema(table):
    psi = table.source.ground_state
    x = table.x
    d = np.diff(psi)
    return [x[i] for i in range(1, len(d)) if d[i - 1] * d[i] <= 0 and psi[i] > 1e-6 * psi.max()]


def test_three_well_regime(dw32):
    assert dw32.regime == "three_well"
    mb, zero, b = dw32.wells
    assert zero == pytest.approx(0.0, abs=1e-9)
    assert mb == pytest.approx(-b, abs=1e-9)
    assert 0 < b < 2.0
    assert dw32.well_is_peak == (True, False, True)
    assert dw32.b == b


def test_one_well_regime(dw02):
    assert dw02.regime == "one_well"
    assert dw02.wells == pytest.approx((0.0,), abs=1e-9)
    assert dw02.b is None


def test_harmonic_quantum_potential(ho):
    assert ho.regime == "one_well"
    inner = np.abs(ho.x) < 3
    assert np.allclose(ho.values[inner], ho.x[inner] ** 2, rtol=2e-4, atol=1e-6)


@pytest.mark.parametrize("lam", [0.02, 0.03125, 0.05, 0.06, 0.1, 0.2, 0.5])
def test_wells_sit_on_ground_state_extrema(lam):
    p = PotentialSpec.symmetric(lam)
    t = build_quantum_potential(solve_spectrum(p, default_grid(p), 2))
    ext = _extrema(t)
    assert len(ext) == len(t.wells)
    assert np.max(np.abs(np.asarray(ext) - np.asarray(t.wells))) <= t.grid.h
    assert np.all(t(np.asarray(t.wells)) <= 1e-6)


def test_asymmetric_wells_have_equal_depth(asym):
    assert asym.regime == "three_well"
    assert np.all(asym(np.asarray(asym.wells)) <= 1e-6)
    # the classical wells are not degenerate, the quantum ones are
    p = asym.source.potential
    assert abs(p.value(p.minima()[0]) - p.value(p.minima()[1])) > 0.05


@pytest.mark.parametrize("fixture", ["dw32", "dw02", "asym"])
def test_quartic_growth_of_u(fixture, request):
    t = request.getfixturevalue(fixture)
    x = t.x
    band = np.abs(x) >= 0.9 * x.max()
    ratio = t.values[band] / x[band] ** 4
    assert ratio.min() > 0
    assert (ratio.max() - ratio.min()) / ratio.min() <= 0.10


def test_regime_boundary():
    lam = find_regime_boundary(0.04, 0.07, 1e-6)
    assert lam == pytest.approx(LAMBDA_STAR, rel=1e-4)
    assert classify(lam + 1e-3) == "one_well"
    assert classify(lam - 1e-3) == "three_well"


def test_boundary_rejects_degenerate_bracket():
    with pytest.raises(QuantumPotentialError):
        find_regime_boundary(0.2, 0.3)
    with pytest.raises(QuantumPotentialError):
        find_regime_boundary(0.3, 0.2)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.015, max_value=1.0))
def test_regime_matches_center_curvature(lam):
    p = PotentialSpec.symmetric(lam)
    t = build_quantum_potential(solve_spectrum(p, default_grid(p), 1))
    if abs(lam - LAMBDA_STAR) > 2e-4:
        assert t.regime == ("three_well" if lam < LAMBDA_STAR else "one_well")
    assert np.all(t.values >= 0)
    assert t.values == pytest.approx(t.values[::-1], rel=1e-8, abs=1e-10)
