import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtunnel.action import QuantumAction, segment_action
from qtunnel.potentials import PotentialSpec, harmonic
from qtunnel.trajectory import (
    TrajectoryError,
    classical_instanton,
    instanton_center,
    instanton_deviation,
    instanton_steepness,
    path_action,
    plan_legs,
    quantum_path,
    ramp_guess,
    relax_bvp,
)

DW = PotentialSpec.symmetric(1 / 32)
EPS = 1e-6


@pytest.fixture(scope="module")
def instanton():
    return relax_bvp(DW, 1.0, -2 + EPS, 2 - EPS, 100.0, 10000)


@pytest.fixture(scope="module")
def qaction(dw32):
    return QuantumAction.from_table(dw32, 1.0)


def test_analytic_instanton():
    x = classical_instanton(1 / 32, 1.0, 3.0)
    assert x(3.0) == 0.0
    h = 1e-6
    assert (x(3 + h) - x(3 - h)) / (2 * h) == pytest.approx(1.0, rel=1e-8)
    assert x(1e3) == pytest.approx(2.0) and x(-1e3) == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        classical_instanton(0.0)


def test_relaxed_instanton_matches_analytic(instanton):
    assert instanton_deviation(instanton, 1 / 32) <= 1e-4
    assert instanton_steepness(instanton) == pytest.approx(1.0, rel=1e-3)
    assert instanton_center(instanton) == pytest.approx(50.0, abs=0.5)


def test_instanton_action_and_energy(instanton):
    assert path_action(instanton, DW) == pytest.approx(8 / 3, rel=1e-6)
    e = instanton.energy_series
    assert instanton.energy_spread() <= 1e-6 * max(np.max(np.abs(e)), 1.0)


def test_velocity_energy_relation(instanton):
    E = np.median(instanton.energy_series)
    x = instanton.positions[2:-2]
    speed = np.sqrt(np.clip(2 * (DW.value(x) - E), 0, None))
    assert np.max(np.abs(np.abs(instanton.velocity[2:-2]) - speed)) <= 1e-5


def test_time_reversal():
    a = relax_bvp(DW, 1.0, -1.5, 0.7, 4.0, 2000)
    b = relax_bvp(DW, 1.0, 0.7, -1.5, 4.0, 2000)
    assert np.max(np.abs(a.reversed().positions - b.positions)) <= 1e-8


def test_constant_trajectory_at_well():
    tr = relax_bvp(DW, 1.0, 2.0, 2.0, 10.0, 500)
    assert np.all(tr.positions == 2.0)
    assert tr.residual == 0.0 and tr.iterations == 0
    with pytest.raises(TrajectoryError, match="flat"):
        instanton_steepness(tr)


def test_rejects_bad_setup():
    with pytest.raises(TrajectoryError):
        relax_bvp(DW, 1.0, 0, 1, -1.0)
    with pytest.raises(TrajectoryError):
        relax_bvp(DW, 1.0, 0, 1, 1.0, n_steps=10)
    with pytest.raises(TrajectoryError):
        relax_bvp(DW, 1.0, 0, 1, 1.0, n_steps=200, guess=np.zeros(5))


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 6.0))
def test_harmonic_boundary_value_problem(x0, x1, T):
    """x'' = x has the closed form (x0 sinh(T - t) + x1 sinh t) / sinh T."""
    tr = relax_bvp(harmonic(), 1.0, x0, x1, T, 400)
    t = tr.times
    exact = (x0 * np.sinh(T - t) + x1 * np.sinh(t)) / np.sinh(T)
    assert np.max(np.abs(tr.positions - exact)) <= 1e-6 * (1 + abs(x0) + abs(x1))


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=5), st.booleans(), st.booleans())
def test_ramp_guess_hits_waypoints(points, h0, h1):
    t = np.linspace(0, 10, 501)
    g = ramp_guess(t, points, hold=(h0, h1))
    assert g[0] == points[0] and g[-1] == points[-1]
    assert np.min(g) >= min(points) - 1e-12 and np.max(g) <= max(points) + 1e-12


def test_leg_plan(dw32, dw02):
    b = dw32.b
    legs = plan_legs(dw32, -2.0, -2.0)
    assert [leg.sign for leg in legs] == [-1, 1, 1, -1]
    assert sum(leg.weight for leg in legs) == 10
    assert plan_legs(dw32, 0.0, 0.0) == []
    single = plan_legs(dw02, -0.5, 0.3)
    assert len(single) == 1 and single[0].via == pytest.approx((0.0,), abs=1e-9)
    assert [leg.sign for leg in plan_legs(dw32, -b, b)] == [1, 1]


def test_quantum_path_through_valleys(qaction, dw32):
    path = quantum_path(qaction, -2.0, -2.0, 100.0)
    t, x, sign, E = path.concatenated()
    assert t[0] == 0.0 and t[-1] == pytest.approx(100.0)
    assert x[0] == -2.0 and x[-1] == -2.0
    b = dw32.b
    assert np.min(np.abs(x + b)) <= 1e-5
    assert np.min(np.abs(x)) <= 1e-5
    assert np.all(x <= 1e-5)
    assert path.durations == pytest.approx([20.0, 30.0, 30.0, 20.0])
    assert set(np.unique(sign)) == {-1, 1}
    for piece in path.pieces:
        assert piece.energy_spread() <= 1e-6 * max(np.max(np.abs(piece.energy_series)), 1.0)


def test_quantum_instanton_is_softer(qaction, dw32, instanton):
    b = dw32.b
    path = quantum_path(qaction, -b, b, 100.0)
    steep = max(instanton_steepness(p) for p in path.pieces)
    assert steep < instanton_steepness(instanton)
    model = qaction.model()
    slides = [path_action(p, model) for p in path.pieces]
    assert sum(slides) < 8 / 3
    assert sum(slides) < path_action(instanton, DW)
    exact = segment_action(dw32, -b, 0.0)
    assert slides[0] == pytest.approx(exact, rel=1e-3)
    assert slides[1] == pytest.approx(exact, rel=1e-3)


def test_one_well_bounce(dw02):
    qa = QuantumAction.from_table(dw02, 1.0)
    path = quantum_path(qa, -1.0, 0.5, 10.0)
    t, x, sign, E = path.concatenated()
    assert len(path.legs) == 1 and np.all(sign == -1)
    assert x[0] == -1.0 and x[-1] == 0.5
    assert np.mean(np.abs(x) < 0.05) * 10.0 > 1.5  # lingers on the hilltop of -U
    slides = -(qa.total_log_action(-1.0, 0.5, 10.0) + qa.floor * 10.0)
    assert path_action(path.pieces[0], qa.model()) == pytest.approx(slides, rel=0.02)
