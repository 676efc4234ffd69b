"""Run configuration shared by the command-line driver and the scripts."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .potentials import PotentialSpec
from .spectral import GridSpec

METHODS = ("spectral", "quantum_action", "semiclassical")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    spectral_tail: float = 1e-10
    calibration_rtol: float = 1e-4
    boundary: float = 1e-6

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ConfigError(f"tolerance {name} must be positive, got {value}")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; its hash is stamped into every CSV."""

    potential: Optional[PotentialSpec] = None
    grid: Optional[GridSpec] = None
    T: tuple = (10.0, 100.0)
    lambdas: tuple = ()
    methods: tuple = METHODS
    anchors: dict = field(default_factory=lambda: {"n": 21})
    out: str = "out"
    tolerances: Tolerances = Tolerances()
    n_levels: int = 20
    endpoints: Optional[tuple] = None
    mass_bracket: tuple = (0.1, 3.0)
    boundary_bracket: tuple = (0.04, 0.07)
    jobs: int = 1

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if not self.T or any(not t > 0 for t in self.T):
            raise ConfigError("T values must be positive")
        if any(not lam > 0 for lam in self.lambdas):
            raise ConfigError("lambda values must be positive")
        if self.n_levels < 2:
            raise ConfigError("need at least two levels")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        lo, hi = self.mass_bracket
        if not 0 < lo < hi:
            raise ConfigError("mass bracket must satisfy 0 < lo < hi")

    def potentials(self):
        """One potential per lambda, or the configured potential alone."""
        if self.lambdas:
            return [PotentialSpec.symmetric(lam) for lam in self.lambdas]
        if self.potential is None:
            raise ConfigError("give a lambda or a potential")
        return [self.potential]

    def anchor_points(self, potential):
        from .calibration import default_anchors
        import numpy as np

        spec = self.anchors
        if "points" in spec:
            return np.asarray(spec["points"], dtype=float)
        if "range" in spec:
            lo, hi = spec["range"]
            return np.linspace(lo, hi, int(spec.get("n", 21)))
        return default_anchors(potential, int(spec.get("n", 21)))

    def to_dict(self):
        d = {
            "potential": self.potential.to_dict() if self.potential else None,
            "grid": [self.grid.x_min, self.grid.x_max, self.grid.n_points] if self.grid else None,
            "T": list(self.T),
            "lambda": list(self.lambdas),
            "methods": list(self.methods),
            "anchors": self.anchors,
            "tolerances": asdict(self.tolerances),
            "n_levels": self.n_levels,
            "endpoints": list(self.endpoints) if self.endpoints else None,
            "mass_bracket": list(self.mass_bracket),
            "boundary_bracket": list(self.boundary_bracket),
        }
        return d

    def digest(self):
        """SHA-256 of the canonical JSON form (output dir and job count excluded)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, d):
        kw = {}
        if d.get("potential"):
            kw["potential"] = PotentialSpec.from_dict(d["potential"])
        if d.get("grid"):
            g = d["grid"]
            kw["grid"] = GridSpec.parse(g) if isinstance(g, str) else GridSpec(*g)
        if "T" in d:
            kw["T"] = tuple(float(t) for t in _as_list(d["T"]))
        if "lambda" in d:
            kw["lambdas"] = tuple(float(x) for x in _as_list(d["lambda"]))
        for key in ("methods", "mass_bracket", "boundary_bracket", "endpoints"):
            if d.get(key) is not None:
                kw[key] = tuple(d[key])
        for key in ("anchors", "out", "n_levels", "jobs"):
            if key in d:
                kw[key] = d[key]
        if "tolerances" in d:
            kw["tolerances"] = Tolerances(**d["tolerances"])
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def override(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        try:
            return replace(self, **changes)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _as_list(v):
    return v if isinstance(v, (list, tuple)) else [v]
