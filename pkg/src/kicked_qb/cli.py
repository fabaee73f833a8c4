"""Command-line interface: ``kicked-qb {trajectory,sweep,validate,units}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import RunConfig, _fmt
from .errors import ConfigError, InvalidSizeError, KickedQBError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3

# command-line flag -> RunConfig field
RUN_FLAGS = {
    "n": "n_sites", "kicks": "kicks", "beta": "beta", "jth": "j_th", "hth": "h_th", "j": "j", "b": "b",
    "g": "g", "gamma_z": "gamma_z", "gamma": "gamma", "omega0": "omega0", "engine": "engine", "dt": "dt",
    "ergotropy": "ergotropy", "out": "out",
}
# sweep axis name -> RunConfig field ("m" is the readout kick)
AXES = {"beta": "beta", "gamma_z": "gamma_z", "gamma": "gamma", "n_sites": "n_sites", "N": "n_sites", "m": "m"}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--n", type=int, help="number of sites")
    p.add_argument("--kicks", type=int, help="number of kicks")
    p.add_argument("--beta", type=float, help="inverse temperature ('inf' allowed)")
    p.add_argument("--jth", type=float, help="Ising coupling of the thermal Hamiltonian")
    p.add_argument("--hth", type=float, help="transverse field of the thermal Hamiltonian")
    p.add_argument("--j", type=float, help="charger Ising coupling")
    p.add_argument("--b", type=float, help="kick strength")
    p.add_argument("--g", type=float, help="battery level spacing")
    p.add_argument("--gamma-z", dest="gamma_z", type=float, help="dephasing rate")
    p.add_argument("--gamma", type=float, help="thermal-bath coupling rate")
    p.add_argument("--omega0", type=float, help="bath frequency")
    p.add_argument("--engine", choices=("auto", "analytic", "dephasing", "dense"))
    p.add_argument("--dt", type=float, help="RK4 step of the dense engine")
    p.add_argument("--ergotropy", action="store_true", default=None, help="also compute ergotropy (dense)")


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def config_from_args(args, base: dict | None = None) -> RunConfig:
    data = dict(base or {})
    if getattr(args, "config", None):
        data.update(_load_json(args.config))
    for flag, name in RUN_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[name] = val
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_trajectory(args) -> int:
    from .runner import run_trajectory

    cfg = config_from_args(args)
    traj = run_trajectory(cfg)
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        with open(cfg.out, "w") as fh:
            traj.to_csv(fh)
    else:
        traj.to_csv(sys.stdout)
    return EXIT_OK


def _sweep_point(payload):
    """Run one grid point; returns (point, rows, csv text or None, error or None)."""
    from .runner import run_trajectory

    cfg_dict, point, readouts = payload
    try:
        cfg = RunConfig.from_dict(cfg_dict)
        traj = run_trajectory(cfg)
    except ConfigError as exc:
        return point, [], None, ("config", str(exc))
    except (KickedQBError, ArithmeticError, ValueError) as exc:
        return point, [], None, ("numerical", str(exc))
    rows = []
    dw = traj.d_ergotropy
    for m in readouts:
        rows.append((m, traj.d_energy[m], None if dw is None else dw[m]))
    return point, rows, traj.to_csv(), None


def _sweep_payloads(spec: dict, overrides: dict):
    base = dict(spec.get("base", {}))
    base.update(overrides)
    axes = spec.get("axes", {})
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("sweep file needs a non-empty 'axes' object")
    unknown = set(axes) - set(AXES)
    if unknown:
        raise ConfigError(f"unsupported sweep axes {sorted(unknown)}; allowed: {sorted(AXES)}")
    names = [a for a in axes if a != "m"]
    payloads = []
    for values in itertools.product(*(axes[a] for a in names)):
        cfg = dict(base)
        point = {}
        for a, v in zip(names, values):
            cfg[AXES[a]] = v
            point[AXES[a]] = v
        n = int(cfg.get("n_sites", RunConfig.n_sites))
        readouts = [int(m) for m in axes["m"]] if "m" in axes else [n // 2]
        cfg["kicks"] = max(readouts)
        cfg["out"] = None
        payloads.append((cfg, point, readouts))
    return payloads


def cmd_sweep(args) -> int:
    if not args.grid:
        raise ConfigError("sweep needs a grid file (--config)")
    spec = _load_json(args.grid)
    overrides = {}
    for flag, name in RUN_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None and name != "out":
            overrides[name] = val
    payloads = _sweep_payloads(spec, overrides)
    out_dir = Path(args.out or "sweep_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs or os.cpu_count() or 1
    if jobs == 1 or len(payloads) == 1:
        results = [_sweep_point(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, payloads))
    failures = []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["beta", "T", "gamma_z", "gamma", "n_sites", "m", "dE", "dW", "status"])
    for i, (point, rows, csv_text, err) in enumerate(results):
        cfg = RunConfig.from_dict(payloads[i][0])
        if csv_text is not None:
            (out_dir / f"point_{i:04d}.csv").write_text(csv_text)
        beta = cfg.beta
        temp = math.inf if beta == 0 else 1.0 / beta
        common = [beta, temp, cfg.gamma_z, cfg.gamma, cfg.n_sites]
        if err is not None:
            failures.append(err[0])
            for m in payloads[i][2]:
                writer.writerow([_fmt(x) for x in common + [m, None, None]] + [f"error: {err[1]}"])
            continue
        for m, de, dw in rows:
            writer.writerow([_fmt(x) for x in common + [m, de, dw]] + ["ok"])
    (out_dir / "aggregate.csv").write_text(buf.getvalue())
    print(f"{len(results) - len(failures)}/{len(results)} points succeeded; aggregate at {out_dir / 'aggregate.csv'}")
    if failures:
        return EXIT_CONFIG if all(f == "config" for f in failures) else EXIT_NUMERICAL
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import format_report, run_suite

    results = run_suite(args.level, args.tolerance_scale)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def cmd_units(args) -> int:
    from .units import physical_units

    rep = physical_units(args.tau, j=args.j, gamma_z=args.gamma_z, gamma=args.gamma, beta=args.beta,
                         omega0=args.omega0, t_phys=args.t_phys, j_th_phys=args.jth_phys)
    print("\n".join(rep.lines()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kicked-qb", description="Kicked-Ising quantum battery simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trajectory", help="energy (and ergotropy) after each kick, as CSV")
    _add_run_flags(p)
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("sweep", help="Cartesian parameter sweep from a JSON grid file")
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep)
    p.add_argument("--out", help="output directory (default: sweep_out)")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")

    p = sub.add_parser("validate", help="cross-engine validation suite")
    p.add_argument("level", nargs="?", choices=("fast", "full"), default="fast")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply all tolerances (0 forces failures, as a negative control)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("units", help="convert dimensionless parameters to laboratory units")
    p.add_argument("--tau", type=float, required=True, help="kick period in seconds")
    p.add_argument("--j", type=float, default=math.pi / 4)
    p.add_argument("--gamma-z", dest="gamma_z", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--omega0", type=float, default=1.0)
    p.add_argument("--t-phys", dest="t_phys", type=float, help="physical temperature in kelvin")
    p.add_argument("--jth-phys", dest="jth_phys", type=float, help="physical J_th in 1/s")
    p.set_defaults(func=cmd_units)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep":
        args.grid, args.config = args.config, None
    try:
        return args.func(args)
    except (ConfigError, InvalidSizeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KickedQBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
