"""Quantum potential tabulated from the ground state.

For a ground state psi_0 the product of quantum mass and shifted quantum
potential is fixed by

    2 m~ (V~(x) - V~_0) = (d ln psi_0 / dx)^2          (hbar = 1)

so the table stores u(x) = (d ln psi_0/dx)^2 on the spectral grid.  Its
zeros (the wells) sit exactly at the extrema of psi_0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import PotentialSpec
from .spectral import (
    SpectralData,
    SpectralError,
    default_grid,
    ground_state_log_derivative,
    solve_spectrum,
)

REGIMES = {1: "one_well", 2: "two_well", 3: "three_well"}


class QuantumPotentialError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumPotentialTable:
    grid: object
    values: np.ndarray
    log_derivative: np.ndarray
    wells: tuple
    well_is_peak: tuple  # True where psi_0 has a maximum
    regime: str
    source: SpectralData

    @property
    def b(self):
        """Outer-well position of a three-well table (right-hand well)."""
        if self.regime != "three_well":
            return None
        return self.wells[-1]

    @property
    def x(self):
        return self.grid.x

    @property
    def ground_energy(self):
        return float(self.source.energies[0])

    @property
    def threshold(self):
        return max(1e-6, 10 * self.grid.h**2 * float(np.max(self.values)))

    def __call__(self, x):
        """u at ``x`` as the square of the linearly interpolated log-derivative."""
        return np.interp(x, self.grid.x, self.log_derivative) ** 2

    def nearest_well(self, x):
        w = np.asarray(self.wells)
        return float(w[np.argmin(np.abs(w - x))])


def _zero_crossings(g):
    """Interior sign changes of g as (position index, fraction, kind)."""
    out = []
    n = len(g)
    i = 1
    while i < n - 2:
        a, b = g[i], g[i + 1]
        if a == 0.0:
            out.append((i, 0.0, g[i - 1] > 0 or g[i + 1] < 0))
            i += 1
            continue
        if a * b < 0:
            out.append((i, a / (a - b), a > 0))
        i += 1
    return out


def build_quantum_potential(spec: SpectralData) -> QuantumPotentialTable:
    """Tabulate u = (d ln psi_0/dx)^2 and locate its wells.

    Wells are the zero crossings of the log-derivative, placed by linear
    interpolation between grid points; this is the same as counting the
    extrema of psi_0, so shallow central wells near the regime boundary are
    neither lost nor invented by thresholding u.
    """
    g = ground_state_log_derivative(spec)
    u = g * g
    x = spec.grid.x
    h = spec.grid.h
    crossings = _zero_crossings(g)
    wells = tuple(float(x[i] + t * h) for i, t, _ in crossings)
    peaks = tuple(bool(k) for _, _, k in crossings)

    thr = max(1e-6, 10 * h**2 * float(np.max(u)))
    for (i, t, _), w in zip(crossings, wells):
        if min(u[i], u[i + 1]) > thr:
            raise QuantumPotentialError(f"zero of d ln psi/dx at {w} is not a well of u (grid noise?)")
    if len(wells) not in REGIMES:
        cands = [float(x[i]) for i in range(1, len(u) - 1)
                 if u[i] <= u[i - 1] and u[i] <= u[i + 1] and u[i] < thr]
        raise QuantumPotentialError(
            f"found {len(wells)} wells at {wells}; candidate minima of u: {cands}"
        )
    return QuantumPotentialTable(spec.grid, u, g, wells, peaks, REGIMES[len(wells)], spec)


def center_is_minimum(spec: SpectralData) -> bool:
    """True when psi_0 has a local minimum at the grid point nearest x = 0."""
    x = spec.grid.x
    c = int(np.argmin(np.abs(x)))
    psi = spec.ground_state
    return bool(psi[c - 1] > psi[c] and psi[c + 1] > psi[c])


def classify(lam, grid=None, mass=1.0):
    """Regime of the symmetric quartic at coupling ``lam``."""
    pot = PotentialSpec.symmetric(lam)
    grid = grid or default_grid(pot, mass)
    spec = solve_spectrum(pot, grid, 1, mass)
    return build_quantum_potential(spec).regime


def find_regime_boundary(lambda_low, lambda_high, tol=1e-6, grid=None, mass=1.0):
    """Bisect for the coupling where psi_0 turns from double to single hump.

    One fixed grid (the default for ``lambda_low``, the widest one) is used
    for every trial coupling so the predicate is evaluated consistently.
    """
    if not 0 < lambda_low < lambda_high:
        raise QuantumPotentialError("need 0 < lambda_low < lambda_high")
    grid = grid or default_grid(PotentialSpec.symmetric(lambda_low), mass)
    if not np.any(np.isclose(grid.x, 0.0, atol=1e-12)):
        raise QuantumPotentialError("boundary search needs x = 0 on the grid")

    def double_hump(lam):
        try:
            spec = solve_spectrum(PotentialSpec.symmetric(lam), grid, 1, mass)
        except SpectralError as exc:
            raise QuantumPotentialError(f"spectrum failed at lambda = {lam}: {exc}") from exc
        return center_is_minimum(spec)

    lo_state = double_hump(lambda_low)
    hi_state = double_hump(lambda_high)
    if lo_state == hi_state:
        raise QuantumPotentialError(
            f"bracket [{lambda_low}, {lambda_high}] does not straddle the regime boundary"
        )
    lo, hi = lambda_low, lambda_high
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if double_hump(mid) == lo_state:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
