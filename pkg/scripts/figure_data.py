"""Regenerate every CSV behind the comparison plots into one directory.

amplitude/error sweeps over 30 couplings at T = 10 and 100, the quantum
path from -2 to -2, the classical and quantum instantons at lambda = 1/32,
the quantum-potential table, and the mass calibration curve at T = 10.
"""

import argparse
from pathlib import Path

import numpy as np

from qtunnel.cli import main as cli, write_csv
from qtunnel.config import RunConfig
from qtunnel.potentials import PotentialSpec
from qtunnel.quantum_potential import build_quantum_potential
from qtunnel.spectral import default_grid, solve_spectrum


def quantum_potential_table(out):
    p = PotentialSpec.symmetric(1 / 32)
    t = build_quantum_potential(solve_spectrum(p, default_grid(p), 2))
    cfg = RunConfig(lambdas=(1 / 32,), methods=("spectral",))
    write_csv(Path(out) / "quantum_potential_lambda0.03125.csv", cfg, ["x", "u", "psi0"],
              zip(t.x, t.values, t.source.ground_state))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figure_data")
    ap.add_argument("--jobs", default="1")
    ap.add_argument("--skip-calibration", action="store_true")
    args = ap.parse_args()
    out = args.out
    runs = [
        ["sweep", "--lambda-log", "0.02", "0.5", "30", "--T", "10,100", "--jobs", args.jobs],
        ["trajectory", "--lambda", "0.03125", "--T", "100", "--x-in", "-2", "--x-fi", "-2"],
        ["trajectory", "--lambda", "0.03125", "--T", "100", "--kind", "classical",
         "--x-in", "-1.999999", "--x-fi", "1.999999"],
        ["boundary"],
    ]
    if not args.skip_calibration:
        lams = ",".join(f"{v:.6g}" for v in np.geomspace(0.06, 0.5, 8))
        runs.append(["calibrate", "--lambda", lams, "--T", "10", "--jobs", args.jobs])
    for argv in runs:
        code = cli(argv + ["--out", out])
        if code:
            print(f"{argv[0]} exited with {code}")
    quantum_potential_table(out)


if __name__ == "__main__":
    main()
