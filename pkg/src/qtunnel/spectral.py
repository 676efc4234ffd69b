"""Finite-difference spectrum of 1-D Hamiltonians and the exact propagator.

H = p^2/2m + V is discretized with the three-point second difference on a
uniform grid with Dirichlet walls at both ends.  The resulting symmetric
tridiagonal matrix is handed to LAPACK bisection / inverse iteration, which
returns only the requested lowest levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

BOUNDARY_TOL = 1e-10
TAIL_FRACTION = 1e-7


class SpectralError(ValueError):
    """Raised when a spectral computation cannot meet its contract."""


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise SpectralError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_points) < 3:
            raise SpectralError("a grid needs at least 3 points")

    @property
    def h(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def weights(self):
        w = np.full(self.n_points, self.h)
        w[0] = w[-1] = self.h / 2
        return w

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.x_min) & (x <= self.x_max)))

    def refined(self, factor=2):
        return GridSpec(self.x_min, self.x_max, factor * (self.n_points - 1) + 1)

    @classmethod
    def parse(cls, text):
        """Build a grid from a ``"min,max,n"`` string."""
        lo, hi, n = text.split(",")
        return cls(float(lo), float(hi), int(n))


def default_grid(potential, mass=1.0, h=0.006, decay=26.0):
    """Symmetric window at spacing ``h`` wide enough for the low levels to decay.

    The half-width is the smallest multiple of 0.5 (at least 6) for which
    the WKB attenuation exp(-int sqrt(2m(V - E)) dx), taken from the outer
    turning point at E = V_min + 1, exceeds ``decay`` e-folds on both sides.
    """
    mins = potential.minima()
    e_ref = float(np.min(potential(mins))) + 1.0
    half = 6.0
    while True:
        xs = np.linspace(-half, half, 4001)
        kappa = np.sqrt(2 * mass * np.clip(potential(xs) - e_ref, 0, None))
        dx = xs[1] - xs[0]
        right = np.sum(kappa[xs > max(mins)]) * dx
        left = np.sum(kappa[xs < min(mins)]) * dx
        if min(left, right) >= decay or half >= 40:
            break
        half += 0.5
    # odd point count keeps x = 0 on the grid
    return GridSpec(-half, half, 2 * int(round(half / h)) + 1)


@dataclass(frozen=True, eq=False)
class SpectralData:
    grid: GridSpec
    energies: np.ndarray
    wavefunctions: np.ndarray  # shape (n_levels, n_points)
    mass: float
    potential: Optional[object] = None

    @property
    def x(self):
        return self.grid.x

    @property
    def ground_state(self):
        return self.wavefunctions[0]

    @property
    def n_levels(self):
        return len(self.energies)

    def psi(self, level, x):
        """Wavefunction ``level`` linearly interpolated at ``x``."""
        return np.interp(x, self.grid.x, self.wavefunctions[level])

    def overlap(self, m, n):
        return float(np.sum(self.grid.weights * self.wavefunctions[m] * self.wavefunctions[n]))

    def scaled(self, alpha):
        """Spectrum of (m/alpha, alpha V): energies scale by alpha, states unchanged."""
        return SpectralData(self.grid, self.energies * alpha, self.wavefunctions,
                            self.mass / alpha, None)


def _tail_refine(psi, diag_shift, threshold):
    """Recompute tiny tail amplitudes from the three-term recurrence.

    Inverse iteration only resolves components down to roughly machine
    epsilon relative to the peak.  In the classically forbidden tails the
    recurrence run inward from the Dirichlet wall is stable, so the ratio
    psi[i]/psi[i+1] (right tail) and psi[i]/psi[i-1] (left tail) is rebuilt
    exactly and chained from the last well-resolved amplitude.  The
    recurrence starts from the decaying root of the local recurrence
    instead of from zero at the wall, so the tail follows the decaying
    solution of the open line up to the last grid point.  The returned
    array carries one extra value on each side: the continuation onto the
    wall points.
    """
    n = len(psi)
    big = np.abs(psi) >= threshold * np.max(np.abs(psi))
    idx = np.flatnonzero(big)
    out = np.zeros(n + 2)
    out[1:-1] = psi
    if len(idx) == 0:
        return out
    # c_i psi_i = psi_{i-1} + psi_{i+1}
    c = diag_shift
    lo, hi = idx[0], idx[-1]
    if hi < n - 1:
        r = _decaying_root(c[-1])  # psi beyond the wall / psi at the last point
        out[-1] = r
        ratios = np.empty(n)
        for i in range(n - 1, hi, -1):
            r = 1.0 / (c[i] - r)
            ratios[i] = r  # psi_i / psi_{i-1}
        for i in range(hi + 1, n):
            out[i + 1] = out[i] * ratios[i]
        out[-1] *= out[-2]
    if lo > 0:
        r = _decaying_root(c[0])
        out[0] = r
        ratios = np.empty(n)
        for i in range(0, lo):
            r = 1.0 / (c[i] - r)
            ratios[i] = r  # psi_i / psi_{i+1}
        for i in range(lo - 1, -1, -1):
            out[i + 1] = out[i + 2] * ratios[i]
        out[0] *= out[1]
    return out


def _decaying_root(c):
    """Smaller root of r^2 - c r + 1 = 0: the decay factor per step where c > 2."""
    if c <= 2:
        return 0.0
    return (c - np.sqrt(c * c - 4.0)) / 2


def solve_spectrum(potential, grid, n_levels=20, mass=1.0, check_levels=2):
    """Lowest ``n_levels`` eigenpairs of p^2/2m + V on ``grid``.

    Wavefunctions are normalized with the trapezoid rule, the ground state
    is positive and every excited state starts with a positive lobe on the
    left.  Raises :class:`SpectralError` if the potential is not confining
    on the window or if any returned level has not decayed below
    ``BOUNDARY_TOL`` next to a wall.  Only the lowest ``check_levels``
    states are held to the wall criterion; higher levels enter the
    propagator with exponentially small weight.
    """
    if n_levels < 1 or n_levels > grid.n_points - 2:
        raise SpectralError(f"cannot compute {n_levels} levels on {grid.n_points} points")
    if mass <= 0:
        raise SpectralError("mass must be positive")
    x = grid.x
    h = grid.h
    v = np.asarray(potential(x), dtype=float)
    _check_confining(v, x)

    kin = 1.0 / (2.0 * mass * h * h)
    inner = v[1:-1]
    d = 2 * kin + inner
    e = np.full(len(inner) - 1, -kin)
    energies, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, n_levels - 1))

    psi = np.zeros((n_levels, grid.n_points))
    for k in range(n_levels):
        shift = 2.0 + (inner - energies[k]) / kin
        psi[k] = _tail_refine(vecs[:, k], shift, TAIL_FRACTION)
    w = grid.weights
    for k in range(n_levels):
        psi[k] /= np.sqrt(np.sum(w * psi[k] ** 2))
        lead = np.flatnonzero(np.abs(psi[k]) > 1e-3 * np.max(np.abs(psi[k])))[0]
        if psi[k, lead] < 0:
            psi[k] = -psi[k]

    if np.any(np.diff(energies) <= 0):
        raise SpectralError("spectrum is degenerate to working precision")
    if check_levels:
        for side, j in (("left", 1), ("right", grid.n_points - 2)):
            worst = np.max(np.abs(psi[:check_levels, j]))
            if worst > BOUNDARY_TOL:
                edge = grid.x_min if side == "left" else grid.x_max
                raise SpectralError(
                    f"grid too narrow: |psi| = {worst:.3e} near the {side} endpoint x = {edge}"
                )
    return SpectralData(grid, energies, psi, float(mass), potential)


def _check_confining(v, x, band=0.05):
    n = max(3, int(band * len(x)))
    left, right = v[:n], v[-n:]
    slack = 1e-12 * max(1.0, np.max(np.abs(v)))
    if np.any(np.diff(left) > slack):
        raise SpectralError(f"potential is not confining near the left endpoint x = {x[0]}")
    if np.any(np.diff(right) < -slack):
        raise SpectralError(f"potential is not confining near the right endpoint x = {x[-1]}")


def spectral_propagator(spec, x, y, T, tol=1e-10):
    """Imaginary-time propagator G(y, T; x, 0) from the truncated spectral sum.

    The relative size of the dropped tail is estimated as
    exp(-(E_last - E_0) T); if that exceeds ``tol`` the call fails instead
    of silently returning an inaccurate value.
    """
    if not T > 0:
        raise SpectralError(f"propagation time must be positive, got {T}")
    if not (spec.grid.contains(x) and spec.grid.contains(y)):
        raise SpectralError("endpoints must lie inside the grid")
    tail = np.exp(-(spec.energies[-1] - spec.energies[0]) * T)
    if tail > tol:
        raise SpectralError(f"spectral tail estimate {tail:.3e} exceeds tolerance {tol:.1e}; add levels")
    grid_x = spec.grid.x
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    px = np.array([np.interp(x, grid_x, p) for p in spec.wavefunctions])
    py = np.array([np.interp(y, grid_x, p) for p in spec.wavefunctions])
    # factor out the ground-state decay so large T does not underflow early
    boltz = np.exp(-(spec.energies - spec.energies[0]) * T)
    extra = np.tensordot(boltz, px * py, axes=(0, 0))
    out = extra * np.exp(-spec.energies[0] * T)
    return float(out) if out.ndim == 0 else out


def propagator_matrix(spec, points, T, tol=1e-10):
    """G(x_j, T; x_i, 0) for all pairs of ``points`` (symmetric matrix)."""
    points = np.asarray(points, dtype=float)
    tail = np.exp(-(spec.energies[-1] - spec.energies[0]) * T)
    if tail > tol:
        raise SpectralError(f"spectral tail estimate {tail:.3e} exceeds tolerance {tol:.1e}; add levels")
    phi = np.array([np.interp(points, spec.grid.x, p) for p in spec.wavefunctions])
    boltz = np.exp(-spec.energies * T)
    return (phi * boltz[:, None]).T @ phi


def ground_state_log_derivative(spec):
    """d ln(psi_0)/dx on the grid.

    Centered differences (psi[i+1] - psi[i-1]) / (2 h psi[i]) on the
    interior; the two wall points, where psi vanishes by construction,
    are filled by linear extrapolation.
    """
    psi = spec.ground_state
    inner = psi[1:-1]
    if np.any(inner <= 0):
        raise SpectralError("ground state must be strictly positive on the interior")
    h = spec.grid.h
    g = np.empty_like(psi)
    g[1:-1] = (psi[2:] - psi[:-2]) / (2 * h * inner)
    g[0] = 2 * g[1] - g[2]
    g[-1] = 2 * g[-2] - g[-3]
    return g


def richardson(coarse, fine, order=2, factor=2):
    """Richardson extrapolation of a quantity converging as h**order."""
    r = factor**order
    return (r * np.asarray(fine) - np.asarray(coarse)) / (r - 1)
