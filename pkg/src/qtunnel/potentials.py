"""Classical 1-D potentials with closed-form evaluation and well geometry.

Three kinds are supported:

* ``symmetric_quartic``: V(x) = lam * (x**2 - 1/(8*lam))**2
* ``asymmetric_quartic``: V(x) = c1 * (x**2 - x0**2)**2 + c2 * (x - x0)**2
* ``polynomial``: V(x) = sum_k coefficients[k] * x**k

All potentials expose ``value``, ``gradient`` and ``curvature`` so they can
be handed to the spectral solver and to the trajectory solver alike.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize

KINDS = ("symmetric_quartic", "asymmetric_quartic", "polynomial")


class PotentialError(ValueError):
    """Raised for invalid or non-confining potential definitions."""


@dataclass(frozen=True)
class Geometry:
    minima: tuple
    barrier: float
    omega: float
    instanton_action: Optional[float] = None

    @property
    def a(self):
        """Outermost minimum (the right-hand classical well)."""
        return max(self.minima)


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PotentialError(f"unknown potential kind {self.kind!r}")
        if self.kind == "symmetric_quartic":
            (lam,) = self.params
            if not lam > 0:
                raise PotentialError(f"lambda must be positive, got {lam}")
        elif self.kind == "asymmetric_quartic":
            c1, c2, x0 = self.params
            if not (c1 > 0 and c2 >= 0 and x0 > 0):
                raise PotentialError("asymmetric quartic needs c1 > 0, c2 >= 0, x0 > 0")
        else:
            coef = np.asarray(self.params, dtype=float)
            deg = len(coef) - 1
            if deg < 2 or deg % 2 or coef[-1] <= 0:
                raise PotentialError(
                    "polynomial potential needs an even degree >= 2 with positive leading coefficient"
                )

    # -- constructors -----------------------------------------------------

    @classmethod
    def symmetric(cls, lam):
        return cls("symmetric_quartic", (float(lam),))

    @classmethod
    def asymmetric(cls, c1=1 / 50, c2=1 / 250, x0=2.5):
        return cls("asymmetric_quartic", (float(c1), float(c2), float(x0)))

    @classmethod
    def polynomial(cls, coefficients):
        return cls("polynomial", tuple(float(c) for c in coefficients))

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        if kind == "symmetric_quartic":
            return cls.symmetric(d["lambda"])
        if kind == "asymmetric_quartic":
            return cls.asymmetric(d.get("c1", 1 / 50), d.get("c2", 1 / 250), d.get("x0", 2.5))
        if kind == "polynomial":
            return cls.polynomial(d["coefficients"])
        raise PotentialError(f"unknown potential kind {kind!r}")

    def to_dict(self):
        if self.kind == "symmetric_quartic":
            return {"kind": self.kind, "lambda": self.params[0]}
        if self.kind == "asymmetric_quartic":
            c1, c2, x0 = self.params
            return {"kind": self.kind, "c1": c1, "c2": c2, "x0": x0}
        return {"kind": self.kind, "coefficients": list(self.params)}

    @property
    def is_symmetric(self):
        if self.kind == "symmetric_quartic":
            return True
        if self.kind == "polynomial":
            return not np.any(np.asarray(self.params)[1::2])
        return self.params[1] == 0

    @property
    def lam(self):
        if self.kind != "symmetric_quartic":
            raise PotentialError("lambda is only defined for the symmetric quartic")
        return self.params[0]

    # -- polynomial form --------------------------------------------------

    def coefficients(self):
        """Power-series coefficients, lowest order first."""
        if self.kind == "symmetric_quartic":
            lam = self.params[0]
            return np.array([1 / (64 * lam), 0.0, -0.25, 0.0, lam])
        if self.kind == "asymmetric_quartic":
            c1, c2, x0 = self.params
            quartic = c1 * np.array([x0**4, 0.0, -2 * x0**2, 0.0, 1.0])
            tilt = c2 * np.array([x0**2, -2 * x0, 1.0, 0.0, 0.0])
            return quartic + tilt
        return np.asarray(self.params, dtype=float)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "symmetric_quartic":
            lam = self.params[0]
            return lam * (x * x - 1 / (8 * lam)) ** 2
        if self.kind == "asymmetric_quartic":
            c1, c2, x0 = self.params
            return c1 * (x * x - x0 * x0) ** 2 + c2 * (x - x0) ** 2
        return P.polyval(x, self.coefficients())

    __call__ = value

    def gradient(self, x):
        return P.polyval(np.asarray(x, dtype=float), P.polyder(self.coefficients()))

    def curvature(self, x):
        return P.polyval(np.asarray(x, dtype=float), P.polyder(self.coefficients(), 2))

    # -- geometry ---------------------------------------------------------

    def stationary_points(self):
        """Real roots of V', sorted."""
        if self.kind == "symmetric_quartic":
            a = 1 / np.sqrt(8 * self.params[0])
            return np.array([-a, 0.0, a])
        if self.kind == "asymmetric_quartic":
            c1, c2, x0 = self.params
            # V' = (x - x0) * (4 c1 x (x + x0) + 2 c2)
            disc = 16 * c1**2 * x0**2 - 32 * c1 * c2
            pts = [x0]
            if disc >= 0:
                r = np.sqrt(disc)
                pts += [(-4 * c1 * x0 - r) / (8 * c1), (-4 * c1 * x0 + r) / (8 * c1)]
            return np.unique(np.array(pts))
        roots = P.polyroots(P.polyder(self.coefficients()))
        real = roots[np.abs(roots.imag) < 1e-9].real
        # polish on the real line
        d1 = P.polyder(self.coefficients())
        d2 = P.polyder(d1)
        out = []
        for r in real:
            for _ in range(3):
                g2 = P.polyval(r, d2)
                if g2 == 0:
                    break
                r = r - P.polyval(r, d1) / g2
            out.append(r)
        return np.unique(np.round(np.array(out), 14))

    def minima(self):
        pts = self.stationary_points()
        mins = pts[self.curvature(pts) > 0]
        if self.kind == "polynomial":
            mins = np.array([_refine_minimum(self, m) for m in mins])
        if len(mins) == 0:
            raise PotentialError("potential has no interior minimum")
        return np.sort(mins)

    def geometry(self, mass=1.0):
        mins = self.minima()
        pts = self.stationary_points()
        maxima = pts[self.curvature(pts) < 0]
        vmin = float(np.min(self.value(mins)))
        if len(maxima):
            barrier = float(np.max(self.value(maxima)) - vmin)
        else:
            barrier = 0.0
        deepest = mins[np.argmin(self.value(mins))]
        omega = float(np.sqrt(self.curvature(deepest) / mass))
        s0 = None
        if self.kind == "symmetric_quartic":
            s0 = 1 / (12 * self.params[0])
        return Geometry(tuple(float(m) for m in mins), barrier, omega, s0)


def _refine_minimum(pot, guess, width=0.5):
    res = optimize.minimize_scalar(pot.value, bracket=(guess - width, guess, guess + width))
    return float(res.x) if res.success else float(guess)


def symmetric_quartic_expanded(lam, x):
    """The expanded form lam*x^4 - x^2/4 + 1/(64 lam) of the symmetric quartic."""
    x = np.asarray(x, dtype=float)
    return lam * x**4 - x**2 / 4 + 1 / (64 * lam)


def harmonic(omega=1.0, mass=1.0):
    """Harmonic oscillator V = m w^2 x^2 / 2 as a polynomial spec."""
    return PotentialSpec.polynomial([0.0, 0.0, 0.5 * mass * omega**2])
