"""Command-line front end: ``effent {gamma,evolve,fig1,fig2,fig3,effent}``.

Exit codes: 0 ok, 1 error, 2 infeasible record.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import experiments as ex
from .config import ConfigError, load_config_file
from .measurement import InfeasibleRecordError, MeasurementRecord, parse_record_line
from .phonons import QuadratureError
from .states import bell_state, format_state, parse_state

log = logging.getLogger("effent")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


def _grid(text: str) -> ex.ScanSpec:
    try:
        lo, hi, n = text.split(":")
        return ex.ScanSpec(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:n, got {text!r}") from exc


def _temps(text: str):
    return tuple(float(t) for t in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config (default: $EFFENT_CONFIG or built-in GaAs)")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for scans")
    common.add_argument("--seed", type=int, default=None, help="minimizer seed (overrides config)")
    common.add_argument("--project-feasible", action="store_true",
                        help="clip infeasible records into the feasible set instead of failing")
    common.add_argument("--gnuplot", action="store_true", help="also write <out>.gp plot script")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="effent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", parents=[common], help="dump dephasing exponents")
    g.add_argument("--temperatures", type=_temps, help="comma-separated list in K")

    e = sub.add_parser("evolve", parents=[common], help="dump a dephasing trajectory")
    e.add_argument("--temperatures", type=_temps)
    e.add_argument("--state", default="bell+", help="bell+, bell- or a path to a state dump")
    e.add_argument("--dump-state", metavar="PATH", help="write the last snapshot as a state dump")

    minim = argparse.ArgumentParser(add_help=False)
    minim.add_argument("--restarts", type=int, default=16)
    minim.add_argument("--analytic-only", action="store_true",
                       help="skip the generic minimizer cross-check")

    f1 = sub.add_parser("fig1", parents=[common, minim], help="full-setup scan over (b, c)")
    f1.add_argument("--a", type=float, required=True)
    f1.add_argument("--b-grid", type=_grid, default=ex.ScanSpec(0, 1, 101))
    f1.add_argument("--c-grid", type=_grid, default=None)

    f2 = sub.add_parser("fig2", parents=[common, minim], help="(x, z) setup scan")
    f2.add_argument("--x-grid", type=_grid, default=ex.ScanSpec(0, 1, 101))
    f2.add_argument("--z-grid", type=_grid, default=ex.ScanSpec(0, 2, 101))

    f3 = sub.add_parser("fig3", parents=[common], help="z-only effective entanglement vs time")
    f3.add_argument("--temperatures", type=_temps)
    f3.add_argument("--inset-out", help="path for the effent(z) inset curve")

    r = sub.add_parser("effent", parents=[common, minim], help="evaluate measurement records")
    r.add_argument("--record", required=True, help="file of 'setup,x,y,z,d,a' lines ('-' for stdin)")
    r.add_argument("--dump-state", metavar="PATH", help="write the witness state(s)")
    return p


def _emit(args, header, rows):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            ex.write_csv(header, rows, fh)
        if args.gnuplot:
            Path(args.out).with_suffix(".gp").write_text(_gnuplot_script(args.command, args.out, header))
    else:
        ex.write_csv(header, rows, sys.stdout)


def _gnuplot_script(kind: str, path: str, header) -> str:
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    if kind in ("fig1", "fig2"):
        x, y = ("b", "c") if kind == "fig1" else ("x", "z")
        xi, yi = header.index(x) + 1, header.index(y) + 1
        lines += ["set view map", f"set xlabel '{x}'", f"set ylabel '{y}'",
                  f"splot '{path}' using {xi}:{yi}:{len(header)} with points palette pt 5"]
    elif kind == "fig3":
        lines += ["set xlabel 't (ps)'", "set ylabel 'effective concurrence'",
                  f"plot '{path}' using 2:4:1 with lines lc variable"]
    else:
        lines += [f"plot '{path}' using 1:{len(header)}"]
    return "\n".join(lines) + "\n"


def _minimizer_opts(args):
    return {"restarts": args.restarts, "generic": not args.analytic_only}


def _parse_records(path: str, project: bool):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    records = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith(("#", "setup,")):
            continue
        setup, values = parse_record_line(line)
        if project:
            rec = ex.project_feasible(setup, values)
            if rec.values != values:
                warnings.warn(f"record {line.strip()!r} clipped to {rec.to_csv_line()!r}", stacklevel=2)
        else:
            rec = MeasurementRecord(values, setup)
        records.append(rec)
    return records


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config_file(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        seed = config.seed
        temps = getattr(args, "temperatures", None)

        if args.command == "gamma":
            _emit(args, *ex.run_gamma(config, temps))
        elif args.command == "evolve":
            if args.state in ("bell+", "bell-"):
                rho0 = bell_state(args.state[-1])
            else:
                rho0 = parse_state(Path(args.state).read_text())
            header, rows, last = ex.run_evolve(config, rho0, temps)
            _emit(args, header, rows)
            if args.dump_state and last is not None:
                Path(args.dump_state).write_text(format_state(last))
        elif args.command == "fig1":
            _emit(args, *ex.run_fig1(args.a, args.b_grid, args.c_grid, seed=seed,
                                     threads=args.threads, **_minimizer_opts(args)))
        elif args.command == "fig2":
            _emit(args, *ex.run_fig2(args.x_grid, args.z_grid, seed=seed,
                                     threads=args.threads, **_minimizer_opts(args)))
        elif args.command == "fig3":
            _emit(args, *ex.run_fig3(config, temps, threads=args.threads))
            inset = args.inset_out
            if inset is None and args.out:
                inset = str(Path(args.out).with_name(Path(args.out).stem + "_inset.csv"))
            if inset:
                with open(inset, "w", encoding="utf-8", newline="\n") as fh:
                    ex.write_csv(*ex.run_fig3_inset(), fh)
        elif args.command == "effent":
            records = _parse_records(args.record, args.project_feasible)
            results = ex.run_effent(records, seed=seed, **_minimizer_opts(args))
            out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
            try:
                for value, method, converged, residual, _ in results:
                    out.write(f"{ex.fmt(value)}, {method}, {ex.fmt(converged)}, {ex.fmt(residual)}\n")
            finally:
                if out is not sys.stdout:
                    out.close()
            if args.dump_state:
                Path(args.dump_state).write_text("\n".join(format_state(r[-1].witness) for r in results))
    except InfeasibleRecordError as exc:
        print(f"effent: infeasible record: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, QuadratureError, OSError, ValueError) as exc:
        print(f"effent: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
