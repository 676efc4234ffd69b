"""Two-loop multi-instanton tunneling amplitude for the symmetric double well."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SemiclassicalInput:
    omega: float
    S0: float
    T: float

    def __post_init__(self):
        if not (self.omega > 0 and self.S0 > 0 and self.T > 0):
            raise ValueError("omega, S0 and T must all be positive")

    @classmethod
    def for_lambda(cls, lam, T, omega=1.0):
        """Symmetric quartic at coupling ``lam``: S0 = 1/(12 lam)."""
        return cls(float(omega), 1.0 / (12.0 * lam), float(T))


def log_sinh(z):
    """ln sinh(z) for z > 0 without overflow."""
    z = np.asarray(z, dtype=float)
    big = z > 20
    out = np.empty_like(z)
    out[big] = z[big] - np.log(2.0) + np.log1p(-np.exp(-2 * z[big]))
    out[~big] = np.log(np.sinh(z[~big]))
    return out if out.ndim else float(out)


def log_amplitude_semiclassical(inp: SemiclassicalInput):
    w, s0, T = inp.omega, inp.S0, inp.T
    rate = np.sqrt(6 * s0 / np.pi) * np.exp(-s0 - (71 / 72) / s0) * w
    return (0.5 * np.log(w / np.pi) + np.log1p(3 / (8 * s0))
            - 0.5 * w * T * (1 - 1 / (3 * s0)) + log_sinh(rate * T))


def amplitude_semiclassical(inp: SemiclassicalInput):
    """G(a, T; -a, 0) at two-loop order, evaluated in the log domain.

    sqrt(w/pi) (1 + 3/(8 S0)) exp(-(w T/2)(1 - 1/(3 S0)))
        * sinh(sqrt(6 S0/pi) exp(-S0 - 71/(72 S0)) w T)
    """
    with np.errstate(over="ignore"):
        return float(np.exp(log_amplitude_semiclassical(inp)))


def large_T_slope(inp: SemiclassicalInput):
    """d ln G / dT once the sinh has become exponential."""
    w, s0 = inp.omega, inp.S0
    return -0.5 * w * (1 - 1 / (3 * s0)) + np.sqrt(6 * s0 / np.pi) * np.exp(-s0 - (71 / 72) / s0) * w
