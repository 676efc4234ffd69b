"""Quantum-action error at T = 100 under grid refinement.

Prints one row per (lambda, grid) with the spacing, E0 and the relative
error of G(a, T; -a, 0) against the spectral sum on the same grid.
"""

import argparse

from qtunnel.action import amplitude_quantum_action
from qtunnel.potentials import PotentialSpec
from qtunnel.quantum_potential import build_quantum_potential
from qtunnel.spectral import default_grid, solve_spectrum, spectral_propagator


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda", dest="lams", default="0.125,0.03125")
    ap.add_argument("--T", type=float, default=100.0)
    ap.add_argument("--levels", type=int, default=3, help="number of grid halvings")
    args = ap.parse_args()
    print("lambda,h,E0,relerr")
    for lam in (float(v) for v in args.lams.split(",")):
        p = PotentialSpec.symmetric(lam)
        a = p.geometry().a
        grid = default_grid(p, h=0.012)
        for _ in range(args.levels):
            t = build_quantum_potential(solve_spectrum(p, grid, 20))
            qa = amplitude_quantum_action(t, -a, a, args.T).value
            err = abs(qa / spectral_propagator(t.source, -a, a, args.T) - 1)
            print(f"{lam:.11e},{grid.h:.11e},{t.ground_energy:.11e},{err:.11e}")
            grid = grid.refined()


if __name__ == "__main__":
    main()
