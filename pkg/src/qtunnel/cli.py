"""Command-line driver: amplitude | sweep | trajectory | calibrate | boundary."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .action import QuantumAction, amplitude_quantum_action
from .calibration import CUSP_LAMBDA, CalibrationWarning, calibrate_mass
from .config import METHODS, ConfigError, RunConfig
from .potentials import PotentialSpec
from .quantum_potential import build_quantum_potential, find_regime_boundary
from .semiclassical import SemiclassicalInput, amplitude_semiclassical
from .spectral import GridSpec, default_grid, solve_spectrum, spectral_propagator
from .trajectory import TrajectoryError, quantum_path, relax_bvp

NUM = "{:.11e}"


# -- computations ------------------------------------------------------------


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return NUM.format(float(v))


def default_endpoints(potential):
    mins = potential.minima()
    return float(mins[0]), float(mins[-1])


def compare_methods(potential, T_values, endpoints=None, methods=METHODS, grid=None,
                    n_levels=20, tail_tol=1e-10):
    """G(y, T; x, 0) per method plus relative errors against the spectral value.

    Returns ``regime`` and one dict per T.  The semiclassical formula only
    covers the symmetric quartic between its minima; elsewhere it is nan.
    """
    grid = grid or default_grid(potential)
    x, y = endpoints or default_endpoints(potential)
    spec = solve_spectrum(potential, grid, n_levels)
    table = build_quantum_potential(spec)
    rows = []
    for T in T_values:
        row = {"T": float(T)}
        if "spectral" in methods:
            row["spectral"] = float(spectral_propagator(spec, x, y, T, tail_tol))
        if "quantum_action" in methods:
            row["quantum_action"] = amplitude_quantum_action(table, x, y, T).value
        if "semiclassical" in methods:
            row["semiclassical"] = _semiclassical_or_nan(potential, x, y, T)
        ref = row.get("spectral")
        for m in ("quantum_action", "semiclassical"):
            if m in row and ref:
                row[f"err_{m}"] = abs(row[m] - ref) / ref
        rows.append(row)
    return table.regime, rows


def _semiclassical_or_nan(potential, x, y, T):
    if potential.kind != "symmetric_quartic":
        return float("nan")
    a = 1 / math.sqrt(8 * potential.lam)
    if not (math.isclose(abs(x), a) and math.isclose(abs(y), a) and x * y < 0):
        return float("nan")
    return amplitude_semiclassical(SemiclassicalInput.for_lambda(potential.lam, T))


def _sweep_row(args):
    lam, T_values, methods, grid, n_levels, tail_tol = args
    try:
        regime, rows = compare_methods(PotentialSpec.symmetric(lam), T_values, None, methods,
                                       grid, n_levels, tail_tol)
        return lam, regime, rows, ""
    except Exception as exc:  # recorded per row, the sweep carries on
        return lam, "", [], f"{type(exc).__name__}: {exc}"


def sweep(config: RunConfig):
    """Evaluate every lambda of the config; results come back in lambda order."""
    if len(config.lambdas) < 2:
        raise ConfigError("a sweep needs at least two lambda values")
    lams = sorted(config.lambdas)
    tasks = [(lam, config.T, config.methods, config.grid, config.n_levels,
              config.tolerances.spectral_tail) for lam in lams]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_sweep_row, tasks))
    return [_sweep_row(t) for t in tasks]


def _calibrate_row(args):
    potential, T, bracket, points, grid, rtol, n_levels = args
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CalibrationWarning)
            res = calibrate_mass(potential, T, bracket, points, grid, rtol, n_levels)
        return res.to_dict(), ""
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"


# -- output ------------------------------------------------------------------


def write_csv(path, config, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config sha256 {config.digest()}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        out.writerows([_fmt(v) for v in row] for row in rows)
    return path


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _label(T):
    return f"{T:g}"


# -- commands ----------------------------------------------------------------


def cmd_amplitude(config: RunConfig):
    report = {"config_sha256": config.digest(), "results": []}
    for pot in config.potentials():
        regime, rows = compare_methods(pot, config.T, config.endpoints, config.methods,
                                       config.grid, config.n_levels,
                                       config.tolerances.spectral_tail)
        x, y = config.endpoints or default_endpoints(pot)
        report["results"].append({"potential": pot.to_dict(), "regime": regime,
                                  "x": x, "y": y, "rows": rows})
        for row in rows:
            vals = "  ".join(f"{k}={_fmt(v)}" for k, v in row.items())
            print(f"{pot.to_dict()} {regime} x={x:g} y={y:g} {vals}")
    write_json(Path(config.out) / "amplitude.json", report)
    return report


def cmd_sweep(config: RunConfig):
    results = sweep(config)
    methods = [m for m in METHODS if m in config.methods]
    errs = [m for m in ("quantum_action", "semiclassical") if m in methods and "spectral" in methods]
    paths = []
    for k, T in enumerate(config.T):
        amp_rows, err_rows = [], []
        prev = None
        for lam, regime, rows, error in results:
            flip = bool(prev is not None and regime and regime != prev)
            prev = regime or prev
            row = rows[k] if rows else {}
            base = [lam, regime or "failed", flip]
            amp_rows.append(base + [row.get(m, float("nan")) for m in methods] + [error])
            err_rows.append(base + [row.get(f"err_{m}", float("nan")) for m in errs] + [error])
        head = ["lambda", "regime", "crosses_lambda_star"]
        paths.append(write_csv(Path(config.out) / f"amplitudes_T{_label(T)}.csv", config,
                               head + [f"G_{m}" for m in methods] + ["error"], amp_rows))
        paths.append(write_csv(Path(config.out) / f"errors_T{_label(T)}.csv", config,
                               head + [f"relerr_{m}" for m in errs] + ["error"], err_rows))
    for p in paths:
        print(p)
    return paths


def cmd_trajectory(config: RunConfig, x_in, x_fi, kind="quantum", mass=1.0, n_steps=None):
    pot = config.potentials()[0]
    grid = config.grid or default_grid(pot)
    if not grid.contains([x_in, x_fi]):
        raise ConfigError(f"endpoints ({x_in}, {x_fi}) lie outside the grid "
                          f"[{grid.x_min}, {grid.x_max}]")
    T = config.T[0]
    if kind == "classical":
        tr = relax_bvp(pot, mass, x_in, x_fi, T, n_steps or 10000)
        t, x, e = tr.times, tr.positions, tr.energy_series
        sign = np.ones_like(t)
    else:
        table = build_quantum_potential(solve_spectrum(pot, grid, config.n_levels))
        path = quantum_path(QuantumAction.from_table(table, mass), x_in, x_fi, T, n_steps)
        if not path.legs:
            raise TrajectoryError("both endpoints sit on valleys: the path is a pure rest")
        t, x, sign, e = path.concatenated()
    name = f"trajectory_{kind}_T{_label(T)}.csv"
    out = write_csv(Path(config.out) / name, config, ["t", "x", "sign", "E"],
                    zip(t, x, sign.astype(int), e))
    print(out)
    return out


def cmd_calibrate(config: RunConfig):
    pots = config.potentials()
    if not pots:
        raise ConfigError("nothing to calibrate")
    T = config.T[0]
    tasks = [(p, T, config.mass_bracket, config.anchor_points(p), config.grid,
              config.tolerances.calibration_rtol, config.n_levels) for p in pots]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_calibrate_row, tasks))
    else:
        results = [_calibrate_row(t) for t in tasks]
    rows, reports = [], []
    for pot, (res, error) in zip(pots, results):
        lam = pot.lam if pot.kind == "symmetric_quartic" else float("nan")
        flagged = pot.kind == "symmetric_quartic" and lam < CUSP_LAMBDA
        rows.append([lam, res["m_tilde"] if res else float("nan"), flagged, error])
        reports.append({"potential": pot.to_dict(), "result": res, "error": error,
                        "below_cusp": flagged})
    label = _label(T)
    csv = write_csv(Path(config.out) / f"calibration_T{label}.csv", config,
                    ["lambda", "m_tilde", "below_cusp", "error"], rows)
    js = write_json(Path(config.out) / f"calibration_T{label}.json",
                    {"config_sha256": config.digest(), "T": T, "rows": reports})
    for r in rows:
        print(",".join(_fmt(v) for v in r))
    return csv, js


def cmd_boundary(config: RunConfig):
    lo, hi = config.boundary_bracket
    lam = find_regime_boundary(lo, hi, config.tolerances.boundary, config.grid)
    report = {"config_sha256": config.digest(), "bracket": [lo, hi], "lambda_star": lam}
    write_json(Path(config.out) / "boundary.json", report)
    print(_fmt(lam))
    return lam


# -- argument parsing --------------------------------------------------------


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser():
    p = argparse.ArgumentParser(prog="qtunnel", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("amplitude", "sweep", "trajectory", "calibrate", "boundary"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run configuration")
        s.add_argument("--lambda", dest="lam", type=_floats,
                       help="comma-separated couplings of the symmetric quartic")
        s.add_argument("--lambda-log", nargs=3, metavar=("LO", "HI", "N"),
                       help="N log-spaced couplings between LO and HI")
        s.add_argument("--T", type=_floats, help="comma-separated propagation times")
        s.add_argument("--methods", help="comma-separated subset of " + ",".join(METHODS))
        s.add_argument("--out", help="output directory")
        s.add_argument("--jobs", type=int, help="worker processes")
        s.add_argument("--grid", help='grid as "min,max,n"')
        s.add_argument("--potential", help="potential as inline JSON")
        s.add_argument("--endpoints", type=_floats, help="x,y of G(y, T; x, 0)")
        s.add_argument("--bracket", type=_floats,
                       help="search bracket (mass for calibrate, lambda for boundary)")
        if name == "trajectory":
            s.add_argument("--x-in", type=float, required=True)
            s.add_argument("--x-fi", type=float, required=True)
            s.add_argument("--kind", choices=("quantum", "classical"), default="quantum")
            s.add_argument("--mass", type=float, default=1.0)
            s.add_argument("--steps", type=int)
    return p


def config_from_args(args):
    config = RunConfig.load(args.config) if args.config else RunConfig()
    lams = args.lam
    if args.lambda_log:
        lo, hi, n = args.lambda_log
        lams = tuple(np.geomspace(float(lo), float(hi), int(n)).tolist())
    bracket = {}
    if args.bracket:
        if len(args.bracket) != 2:
            raise ConfigError("--bracket needs two values")
        key = "boundary_bracket" if args.command == "boundary" else "mass_bracket"
        bracket[key] = args.bracket
    return config.override(
        lambdas=lams,
        T=args.T,
        methods=tuple(args.methods.split(",")) if args.methods else None,
        out=args.out,
        jobs=args.jobs,
        grid=GridSpec.parse(args.grid) if args.grid else None,
        potential=PotentialSpec.from_dict(json.loads(args.potential)) if args.potential else None,
        endpoints=args.endpoints,
        **bracket,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "amplitude":
            cmd_amplitude(config)
        elif args.command == "sweep":
            cmd_sweep(config)
        elif args.command == "trajectory":
            cmd_trajectory(config, args.x_in, args.x_fi, args.kind, args.mass, args.steps)
        elif args.command == "calibrate":
            cmd_calibrate(config)
        else:
            cmd_boundary(config)
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                          "command": args.command}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
