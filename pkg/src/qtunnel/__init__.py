"""Imaginary-time tunneling amplitudes in 1-D double wells.

Three routes to G(y, T; x, 0): the exact spectral sum, the quantum-action
functional built from the ground state, and the two-loop instanton formula.
"""

from .action import QuantumAction, amplitude_quantum_action, decompose_trajectory
from .calibration import calibrate_mass, energies_from_G, transition_matrix
from .config import RunConfig
from .potentials import PotentialSpec, harmonic
from .quantum_potential import build_quantum_potential, classify, find_regime_boundary
from .semiclassical import SemiclassicalInput, amplitude_semiclassical
from .spectral import GridSpec, default_grid, solve_spectrum, spectral_propagator
from .trajectory import classical_instanton, quantum_path, relax_bvp

__all__ = [
    "GridSpec", "PotentialSpec", "QuantumAction", "RunConfig", "SemiclassicalInput",
    "amplitude_quantum_action", "amplitude_semiclassical", "build_quantum_potential",
    "calibrate_mass", "classical_instanton", "classify", "decompose_trajectory",
    "default_grid", "energies_from_G", "find_regime_boundary", "harmonic", "quantum_path",
    "relax_bvp", "solve_spectrum", "spectral_propagator", "transition_matrix",
]
