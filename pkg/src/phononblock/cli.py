"""Command-line front end: ``phononblock <command> --config PATH --out PATH``."""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import load_config, preset_names
from .errors import (
    ConfigError,
    DegenerateDenominator,
    PhononBlockError,
    UndrivenSystem,
    VacuumDenominator,
)
from .experiments import (
    WORKERS_ENV,
    Table,
    run_feasibility,
    run_fscan,
    run_g2tau,
    run_optimal,
    run_steady,
    run_sweep,
    run_tscan,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_UNDEFINED = 4

_EPILOG = f"""\
exit codes:
  0  success
  2  configuration error (bad key, value or file)
  3  solver failure (no steady state, non-positive state, integration failure)
  4  undefined observable (e.g. g2 of an empty mode, vanishing denominator)

Scans record per-point failures as ERR:<Name> tokens in the row and still
exit 0.  Worker processes: ${WORKERS_ENV} (default: available CPUs).
Bundled presets usable as --config: {", ".join(preset_names())}.
"""

log = logging.getLogger("phononblock")


def format_cell(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.8e}"
    if x is None:
        return ""
    return str(x)


def write_csv(path: Path, table: Table) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([format_cell(x) for x in row])


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def write_manifest(out: Path, command: str, cfg, table: Table) -> Path:
    entries = [r.as_dict() for r in table.records]
    manifest = {
        "command": command,
        "config_source": cfg.source,
        "config": cfg.values,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "output": out.name,
        "rows": len(table.rows),
        "summary": table.summary,
        "points": entries,
        "warnings": sorted({w for e in entries for w in e["warnings"]}),
        "errors": sum(1 for e in entries if e["error"]),
    }
    path = manifest_path(out)
    path.write_text(json.dumps(_jsonable(manifest), indent=2) + "\n", encoding="utf-8")
    return path


def _print_steady(table: Table) -> None:
    s = table.summary
    print(f"g2(0)            {s['g2_zero']:.6e}")
    if s.get("g2_analytic") is not None:
        a = s["g2_analytic"]
        print(f"g2(0) analytic   {a:.6e}" if isinstance(a, float) else f"g2(0) analytic   {a}")
    else:
        print(f"note: {s['note']}")
    print(f"<n1>             {s['mean_phonon_1']:.6e}")
    print(f"<n2>             {s['mean_phonon_2']:.6e}")
    print(f"residual         {s['residual']:.3e}  ({s['method']})")
    print(f"{'m':>3}  {'P_m':>14}  {'Poisson':>14}")
    for m, p, q in table.rows:
        print(f"{m:>3}  {p:14.6e}  {q:14.6e}")


def _print_rows(table: Table, limit: int = 12) -> None:
    print(",".join(table.header))
    for row in table.rows[:limit]:
        print(",".join(format_cell(x) for x in row))
    if len(table.rows) > limit:
        print(f"... ({len(table.rows)} rows)")


def _print_g2tau(table: Table) -> None:
    s = table.summary
    print(f"expected period 2pi/J = {s['expected_period']:.6g}, window pi/J = {s['expected_window']:.6g}")
    for t, fit in s["fits"].items():
        g0, per, win = fit["g2_zero"], fit["period"], fit["window"]
        print(f"T = {t} T0: g2(0) = {format_cell(g0)}  period = {format_cell(per)}  "
              f"window = {format_cell(win)}")


RUNNERS = {
    "steady": (run_steady, "single steady state: g2(0), means, P_m against Poisson"),
    "sweep": (None, "two-axis grid of g2(0) over system parameters"),
    "tscan": (run_tscan, "g2(0) against temperature with regime labels"),
    "g2tau": (run_g2tau, "delayed correlation g2(tau) per temperature"),
    "fscan": (run_fscan, "g2(0) against drive strength per temperature"),
    "optimal": (run_optimal, "exact and large-J optimal (Delta, U)"),
    "feasibility": (run_feasibility, "SI estimates for a silicon beam"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phononblock",
        description="Phonon antibunching in coupled nonlinear mechanical resonators.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in RUNNERS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=_EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, help="config file or preset name")
        p.add_argument("--out", required=True, type=Path, help="CSV output path")
        p.add_argument("-q", "--quiet", action="store_true", help="no console summary")
    return parser


def run(command: str, config: str, out: Path, quiet: bool = False) -> int:
    cfg = load_config(config)
    cfg.check_command(command)
    if command == "sweep":
        table = run_sweep(cfg.sweep_spec())
    else:
        table = RUNNERS[command][0](cfg)
    write_csv(out, table)
    write_manifest(out, command, cfg, table)
    if not quiet:
        if command == "steady":
            _print_steady(table)
        elif command == "g2tau":
            _print_g2tau(table)
        else:
            _print_rows(table)
        if table.errors:
            print(f"{len(table.errors)} point(s) failed; see {manifest_path(out).name}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args.command, args.config, args.out, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (VacuumDenominator, DegenerateDenominator, UndrivenSystem) as exc:
        print(f"undefined observable ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except PhononBlockError as exc:
        print(f"solver failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
