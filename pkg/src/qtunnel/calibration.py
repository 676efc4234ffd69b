"""Finite-T calibration of the quantum mass.

The ground state fixes only the product m~ (V~ - V~_0).  At finite T the
mass enters through the time the trajectory needs to slide between
valleys, so the transition matrix

    G_ij = Z^2 exp[Sigma(x_i -> x_j)]

built from relaxed finite-T trajectories depends on m~.  Its eigenvalues
give energies E_n = -ln(mu_n)/T, and m~ is tuned until the gap E_1 - E_0
matches the Schroedinger value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .action import QuantumAction, anchor_well
from .potentials import PotentialSpec
from .quantum_potential import build_quantum_potential
from .spectral import default_grid, solve_spectrum
from .trajectory import TrajectoryError, leg_steps, path_action, plan_legs, solve_leg

CUSP_LAMBDA = 5e-2
DWELL_EFOLDS = 8.0


class CalibrationError(RuntimeError):
    pass


class CalibrationWarning(UserWarning):
    pass


@dataclass
class CalibrationResult:
    m_tilde: float
    lam: float
    T: float
    matched_E1: float
    reference_E1: float
    matched_E0: float
    reference_E0: float
    search_trace: list = field(default_factory=list)
    anchor_points: np.ndarray = None
    warning: str = ""

    def to_dict(self):
        return {
            "m_tilde": self.m_tilde,
            "lambda": self.lam,
            "T": self.T,
            "matched_E1": self.matched_E1,
            "reference_E1": self.reference_E1,
            "matched_E0": self.matched_E0,
            "reference_E0": self.reference_E0,
            "search_trace": [list(map(float, row)) for row in self.search_trace],
            "anchor_points": [float(p) for p in self.anchor_points],
            "warning": self.warning,
        }


def default_anchors(potential, n=21):
    """N points spread uniformly over the two wells plus two units of tail."""
    half = max(abs(m) for m in potential.minima()) + 2.0
    return np.linspace(-half, half, n)


def trapezoid_weights(points):
    points = np.asarray(points, dtype=float)
    d = np.diff(points)
    w = np.zeros(len(points))
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


class _LegCache:
    def __init__(self, qaction):
        self.qaction = qaction
        self.model = qaction.model()
        self.store = {}

    def dwell_cap(self, leg):
        """Leg duration beyond which extra dwelling changes the action by about e^-16."""
        wells = [p for p, on in ((leg.start, leg.start_at_well), (leg.end, leg.end_at_well)) if on]
        wells += list(leg.via)
        if not wells:
            return np.inf
        omega = np.sqrt(np.abs(self.model.curvature(np.asarray(wells))) / self.qaction.mass)
        return DWELL_EFOLDS / max(float(np.min(omega)), 1e-12) * (1 + len(wells))

    def action(self, leg, duration):
        duration = min(duration, self.dwell_cap(leg))
        key = (leg, round(duration, 12))
        if key not in self.store:
            span = (min(leg.start, leg.end, *leg.via), max(leg.start, leg.end, *leg.via))
            n = leg_steps(self.model, self.qaction.mass, span, duration)
            tr = solve_leg(self.model, self.qaction.mass, leg, duration, n)
            self.store[key] = path_action(tr, self.model)
        return self.store[key]


def path_log_action(qaction, x, y, T, cache=None):
    """Signed finite-T action Sigma(x -> y) including the rest cost -V~_0 T."""
    cache = cache or _LegCache(qaction)
    legs = plan_legs(qaction.table, x, y)
    total = sum(leg.weight for leg in legs)
    out = -qaction.floor * T
    for leg in legs:
        try:
            out += leg.sign * cache.action(leg, T * leg.weight / total)
        except TrajectoryError as exc:
            raise TrajectoryError(f"leg {leg.start} -> {leg.end} of pair ({x}, {y}): {exc}",
                                  exc.residual) from exc
    return out


def action_matrix(qaction, points, T):
    """Sigma_i^j for all ordered pairs of ``points`` (symmetric by time reversal)."""
    points = np.asarray(points, dtype=float)
    if len(np.unique(points)) != len(points):
        raise CalibrationError("anchor points must be distinct")
    if not qaction.table.grid.contains(points):
        raise CalibrationError("anchor points must lie inside the grid")
    cache = _LegCache(qaction)
    n = len(points)
    sigma = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            sigma[i, j] = sigma[j, i] = path_log_action(qaction, points[i], points[j], T, cache)
    return sigma


def transition_matrix(qaction, points, T, Z=None):
    if Z is None:
        Z = float(qaction.table.source.psi(0, anchor_well(qaction.table)))
    return Z * Z * np.exp(action_matrix(qaction, points, T))


def energies_from_G(G, T, weights=None):
    """E_n = -ln(mu_n)/T from the positive eigenvalues of W^1/2 G W^1/2."""
    G = np.asarray(G, dtype=float)
    if weights is None:
        weights = np.ones(len(G))
    sw = np.sqrt(np.asarray(weights, dtype=float))
    mu = np.linalg.eigvalsh(sw[:, None] * G * sw[None, :])[::-1]
    if not mu[0] > 0:
        raise CalibrationError("leading eigenvalue of G is not positive")
    mu = mu[mu > 0]
    return -np.log(mu) / T


def _symmetric_lambda(potential):
    return potential.lam if potential.kind == "symmetric_quartic" else None


def calibrate_mass(potential, T, bracket=(0.1, 3.0), points=None, grid=None, rtol=1e-4,
                   n_levels=20, table=None):
    """Tune m~ so the G_ij gap reproduces E_1 - E_0 of the Schroedinger spectrum.

    The root is bracketed in ln m~ and found with Brent's method; every
    evaluated candidate is kept in ``search_trace`` as (m~, E_1 estimate).
    """
    if not isinstance(potential, PotentialSpec):
        potential = PotentialSpec.symmetric(potential)
    if not T > 0:
        raise CalibrationError("T must be positive")
    lo, hi = bracket
    if not 0 < lo < hi:
        raise CalibrationError("bracket must satisfy 0 < m_lo < m_hi")
    if table is None:
        grid = grid or default_grid(potential)
        table = build_quantum_potential(solve_spectrum(potential, grid, n_levels))
    spec = table.source
    e0_ref, e1_ref = float(spec.energies[0]), float(spec.energies[1])
    points = default_anchors(potential) if points is None else np.asarray(points, dtype=float)
    weights = trapezoid_weights(points)
    trace = []

    def energies(m):
        qa = QuantumAction.from_table(table, m)
        return energies_from_G(transition_matrix(qa, points, T), T, weights)

    seen = {}

    def mismatch(log_m):
        if log_m in seen:
            return seen[log_m]
        m = float(np.exp(log_m))
        e = energies(m)
        gap = e[1] - e[0] if len(e) > 1 else np.inf
        e1 = e0_ref + gap
        trace.append((m, e1))
        seen[log_m] = min(e1 - e1_ref, 1e3)
        return seen[log_m]

    f_lo, f_hi = mismatch(np.log(lo)), mismatch(np.log(hi))
    if f_lo * f_hi > 0:
        raise CalibrationError(
            f"E1 mismatch has the same sign at m~ = {lo} ({f_lo:+.3e}) and {hi} ({f_hi:+.3e}); "
            "try a wider bracket"
        )
    log_m = brentq(mismatch, np.log(lo), np.log(hi), rtol=rtol / 10, xtol=rtol / 10)
    m = float(np.exp(log_m))
    e = energies(m)
    lam = _symmetric_lambda(potential)
    note = ""
    if lam is not None and lam < CUSP_LAMBDA:
        note = f"lambda = {lam} lies below {CUSP_LAMBDA}: calibrated mass is not reliable there"
        warnings.warn(note, CalibrationWarning, stacklevel=2)
    return CalibrationResult(m, lam, float(T), float(e0_ref + e[1] - e[0]), e1_ref,
                             float(e[0]), e0_ref, trace, points, note)
