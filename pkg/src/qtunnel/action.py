"""Quantum-action transition amplitudes in the large-T limit.

The ground state is rebuilt branch by branch from the tabulated quantum
potential, and G(y, T; x, 0) is written as Z^2 exp[sum_v sgn_v Sigma_v]
where each Sigma_v is the action of one piece of a boundary-to-boundary
trajectory: the approach from x to a valley of the quantum potential, the
instanton slides between valleys, the rest in a valley and the exit to y.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List

import numpy as np
from scipy.interpolate import CubicSpline

from .quantum_potential import QuantumPotentialTable

WELL_SNAP = 1e-9


class ActionError(ValueError):
    pass


@dataclass(frozen=True)
class ActionSegment:
    start: float
    end: float
    kind: str  # "slide" or "rest"
    sign: int
    value: float

    @property
    def signed(self):
        return self.sign * self.value


@dataclass(frozen=True)
class AmplitudeResult:
    value: float
    log_value: float
    segments: List[ActionSegment] = field(default_factory=list)
    Z: float = float("nan")
    method_tag: str = "quantum_action"


# -- quadrature --------------------------------------------------------------


def _cell_abs_integrals(g, h):
    """Exact integral of |g| over each cell for piecewise-linear g.

    Where g changes sign inside a cell the integrand has a kink at the
    interpolated zero; integrating the two triangles separately keeps the
    quadrature exact there instead of smearing the kink.
    """
    a, b = g[:-1], g[1:]
    same = a * b >= 0
    out = np.empty_like(a)
    out[same] = 0.5 * h * (np.abs(a[same]) + np.abs(b[same]))
    a2, b2 = a[~same], b[~same]
    out[~same] = 0.5 * h * (a2 * a2 + b2 * b2) / (np.abs(a2) + np.abs(b2))
    return out


def _cumulative(qpt):
    cache = qpt.__dict__.get("_cum_abs")
    if cache is None:
        cells = _cell_abs_integrals(qpt.log_derivative, qpt.grid.h)
        cache = np.concatenate([[0.0], np.cumsum(cells)])
        object.__setattr__(qpt, "_cum_abs", cache)
    return cache


def _abs_primitive(qpt, x):
    """int_{x_min}^{x} |d ln psi/ds| ds for the piecewise-linear log-derivative."""
    grid = qpt.grid
    g = qpt.log_derivative
    h = grid.h
    cum = _cumulative(qpt)
    s = (x - grid.x_min) / h
    i = int(np.clip(np.floor(s), 0, grid.n_points - 2))
    t = s - i
    ga, gb = g[i], g[i] + t * (g[i + 1] - g[i])
    dx = t * h
    if ga * gb >= 0:
        part = 0.5 * dx * (abs(ga) + abs(gb))
    else:
        part = 0.5 * dx * (ga * ga + gb * gb) / (abs(ga) + abs(gb))
    return cum[i] + part


def segment_action(qpt: QuantumPotentialTable, x1, x2):
    """Slide action int |sqrt(u(s))| ds between ``x1`` and ``x2`` (hbar = 1).

    u already carries the factor 2 m~, so the integrand is |d ln psi_0/dx|.
    """
    if not (qpt.grid.contains(x1) and qpt.grid.contains(x2)):
        raise ActionError(f"segment [{x1}, {x2}] leaves the grid")
    return abs(_abs_primitive(qpt, x2) - _abs_primitive(qpt, x1))


# -- valley bookkeeping ------------------------------------------------------


def anchor_well(qpt: QuantumPotentialTable):
    """Valley where the normalization Z = psi_0(anchor) is fixed.

    Parity-symmetric three-well tables anchor at the central well x = 0;
    every other table anchors at the global maximum of psi_0.
    """
    wells = np.asarray(qpt.wells)
    pot = qpt.source.potential
    symmetric = pot is not None and getattr(pot, "is_symmetric", False)
    if qpt.regime == "three_well" and symmetric:
        return float(wells[1])
    psi = qpt.source.psi(0, wells)
    peaks = np.asarray(qpt.well_is_peak)
    return float(wells[peaks][np.argmax(psi[peaks])])


def _is_at_well(qpt, x):
    w = np.asarray(qpt.wells)
    j = int(np.argmin(np.abs(w - x)))
    return abs(w[j] - x) <= WELL_SNAP * max(1.0, abs(x)), float(w[j])


def uphill_well(qpt: QuantumPotentialTable, x):
    """Valley reached from ``x`` by following increasing psi_0.

    A point sitting on a valley returns that valley.
    """
    on, w = _is_at_well(qpt, x)
    if on:
        return w
    g = np.interp(x, qpt.grid.x, qpt.log_derivative)
    wells = np.asarray(qpt.wells)
    peaks = np.asarray(qpt.well_is_peak)
    if g > 0:
        cand = wells[(wells > x) & peaks]
        return float(cand[0]) if len(cand) else float(wells[-1])
    cand = wells[(wells < x) & peaks]
    return float(cand[-1]) if len(cand) else float(wells[0])


def _well_index(qpt, w):
    return int(np.argmin(np.abs(np.asarray(qpt.wells) - w)))


def bridge(qpt: QuantumPotentialTable, start, stop, ascending):
    """Inter-valley slides from valley ``start`` to valley ``stop``.

    ``ascending`` picks the sign convention: for the leg out of the anchor
    toward the exit point a slide counts positively when psi_0 grows along
    it, for the leg into the anchor when psi_0 falls along it.
    """
    i, j = _well_index(qpt, start), _well_index(qpt, stop)
    step = 1 if j > i else -1
    wells, peaks = qpt.wells, qpt.well_is_peak
    out = []
    for k in range(i, j, step):
        a, b = wells[k], wells[k + step]
        grows = peaks[k + step]
        sign = 1 if grows == ascending else -1
        out.append(ActionSegment(a, b, "slide", sign, segment_action(qpt, a, b)))
    return out


def decompose_trajectory(qpt: QuantumPotentialTable, x, y, T, E_gr=None):
    """Signed pieces of the trajectory realizing G(y, T; x, 0).

    The path runs from ``x`` up to its valley, slides valley by valley to the
    anchor, rests there for the whole time T and returns the same way to
    ``y``.  Approach and exit always count negatively; each slide carries the
    sign that reproduces the branch of the ground state it crosses.
    """
    if not T > 0:
        raise ActionError("T must be positive")
    if not (qpt.grid.contains(x) and qpt.grid.contains(y)):
        raise ActionError("endpoints must lie inside the grid")
    E_gr = qpt.ground_energy if E_gr is None else E_gr
    anchor = anchor_well(qpt)
    mx, my = uphill_well(qpt, x), uphill_well(qpt, y)
    segs = []
    if not _is_at_well(qpt, x)[0]:
        segs.append(ActionSegment(x, mx, "slide", -1, segment_action(qpt, x, mx)))
    segs += bridge(qpt, mx, anchor, ascending=False)
    segs.append(ActionSegment(anchor, anchor, "rest", -1, E_gr * T))
    segs += bridge(qpt, anchor, my, ascending=True)
    if not _is_at_well(qpt, y)[0]:
        segs.append(ActionSegment(my, y, "slide", -1, segment_action(qpt, my, y)))
    return segs


def amplitude_quantum_action(qpt, x, y, T, Z=None, E_gr=None, use_reconstruction=True):
    """G(y, T; x, 0) = Z^2 exp[sum sgn * Sigma] in the Feynman-Kac limit.

    With ``use_reconstruction=False`` the tabulated psi_0 is used directly
    in place of the rebuilt branches, which isolates the quadrature error.
    """
    E_gr = qpt.ground_energy if E_gr is None else E_gr
    anchor = anchor_well(qpt)
    if Z is None:
        Z = float(qpt.source.psi(0, anchor))
    segs = decompose_trajectory(qpt, x, y, T, E_gr)
    if use_reconstruction:
        log_val = 2 * np.log(Z) + sum(s.signed for s in segs)
    else:
        psi = qpt.source.psi(0, [x, y])
        log_val = float(np.log(psi[0]) + np.log(psi[1]) - E_gr * T)
    return AmplitudeResult(float(np.exp(log_val)), float(log_val), segs, float(Z))


def log_branch(qpt, x):
    """ln psi_0(x) - ln Z from the signed valley decomposition."""
    anchor = anchor_well(qpt)
    mx = uphill_well(qpt, x)
    total = 0.0 if _is_at_well(qpt, x)[0] else -segment_action(qpt, x, mx)
    return total + sum(s.signed for s in bridge(qpt, mx, anchor, ascending=False))


def reconstruct_ground_state(qpt: QuantumPotentialTable, Z=None):
    """Ground state rebuilt on the grid from the quantum potential.

    In the three-well case this is the four-branch construction with
    constants Z_I = Z_IV = Z J and Z_II = Z_III = Z, J = exp(Sigma(0 -> b));
    fewer wells reduce to the same construction with fewer branches.
    """
    if Z is None:
        Z = float(qpt.source.psi(0, anchor_well(qpt)))
    x = qpt.grid.x
    return Z * np.exp(np.array([log_branch(qpt, xi) for xi in x]))


def instanton_factor(qpt):
    """J = exp(Sigma(0 -> b)) for a three-well table."""
    if qpt.regime != "three_well":
        raise ActionError("J is defined for the three-well regime only")
    return float(np.exp(segment_action(qpt, qpt.wells[1], qpt.wells[2])))


# -- quantum action with explicit mass ---------------------------------------


@dataclass(frozen=True, eq=False)
class QuantumAction:
    """Quantum mass and tabulated quantum potential V~ with floor V~_0 = E_gr.

    Only the product m~ (V~ - V~_0) is fixed by the ground state; the mass
    itself is a free parameter until it is calibrated at finite T.
    """

    table: QuantumPotentialTable
    mass: float
    potential_values: np.ndarray
    floor: float

    @classmethod
    def from_table(cls, qpt, mass=1.0):
        e0 = qpt.ground_energy
        return cls(qpt, float(mass), e0 + qpt.values / (2 * mass), e0)

    def scaled(self, alpha):
        """(m~, V~) -> (m~/alpha, alpha V~); the table u is recomputed from them."""
        vt = alpha * self.potential_values
        floor = alpha * self.floor
        mass = self.mass / alpha
        u = 2 * mass * (vt - floor)
        g = np.sign(self.table.log_derivative) * np.sqrt(u)
        table = replace(self.table, values=u, log_derivative=g)
        return QuantumAction(table, mass, vt, floor)

    def segment(self, x1, x2):
        return segment_action(self.table, x1, x2)

    def total_log_action(self, x, y, T):
        """Signed action sum (excluding ln Z^2) with rest cost V~_0 T."""
        return sum(s.signed for s in decompose_trajectory(self.table, x, y, T, self.floor))

    def model(self):
        """Smooth V~ - V~_0 for trajectory solves."""
        return SquaredSplinePotential(self.table.grid.x, self.table.log_derivative, self.mass)


class SquaredSplinePotential:
    """U(x) = G(x)^2 / (2 m~) with G a cubic spline of d ln psi_0/dx.

    Squaring the interpolated log-derivative (instead of interpolating u)
    keeps U non-negative with exact double zeros, so the hilltops of -U
    sit precisely at the roots of G.
    """

    def __init__(self, x, log_derivative, mass):
        self.spline = CubicSpline(x, log_derivative)
        self._d1 = self.spline.derivative(1)
        self._d2 = self.spline.derivative(2)
        self.mass = float(mass)

    def value(self, x):
        return self.spline(x) ** 2 / (2 * self.mass)

    __call__ = value

    def gradient(self, x):
        return self.spline(x) * self._d1(x) / self.mass

    def curvature(self, x):
        return (self._d1(x) ** 2 + self.spline(x) * self._d2(x)) / self.mass

    def refine_well(self, w):
        """Root of G next to the tabulated well position ``w``."""
        roots = self.spline.roots(extrapolate=False)
        if len(roots) == 0:
            return float(w)
        return float(roots[np.argmin(np.abs(roots - w))])
