"""Command-line scenario runner.

Exit status: 0 when every assertion passes, 1 when one fails, 2 for a
configuration error, 3 for an I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .config import PRIMARY_TOLERANCE, SCENARIOS, ConfigError, ScenarioConfig, load, load_default
from .errors import DegenerateFieldError, LandauError, ParameterError
from .grid import atomic_write_text
from .scenarios import RUNNERS, Outcome

OUT_ENV = "LANDAU_HALL_OUT"
SCHEMA_VERSION = "1"
UNITS = "natural units unless configured otherwise: lengths in sqrt(hbar/(m w)), currents in q w sqrt(hbar/(m w))"

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def summary_schema() -> dict:
    text = (resources.files("landau_hall") / "schemas" / "summary.schema.json").read_text()
    return json.loads(text)


def _grid_arg(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <nx>x<ny>, got {text!r}") from None
    return nx, ny


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="landau-hall", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, scenario in SCENARIOS.items():
        p = sub.add_parser(verb, help=f"run the {scenario} scenario")
        p.add_argument("--config", type=Path, help="TOML config or a manifest.json from an earlier run")
        p.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV}/{scenario})")
        p.add_argument("--tolerance", type=float,
                       help=f"override tolerances.{PRIMARY_TOLERANCE[scenario]}")
        p.add_argument("--grid", type=_grid_arg, metavar="NXxNY", help="grid points per axis")
        p.add_argument("--quiet", action="store_true", help="print nothing on success")
    return parser


def resolve(args) -> ScenarioConfig:
    scenario = SCENARIOS[args.verb]
    cfg = load(args.config, scenario) if args.config else load_default(scenario)
    if args.tolerance is not None:
        if not args.tolerance > 0:
            raise ConfigError("--tolerance: must be positive")
        cfg.sections["tolerances"][PRIMARY_TOLERANCE[scenario]] = float(args.tolerance)
    if args.grid is not None:
        nx, ny = args.grid
        if min(nx, ny) < 16:
            raise ConfigError("--grid: need at least 16 points per axis")
        cfg.sections["grid"].update(nx=nx, ny=ny)
    return cfg


def output_dir(args, cfg: ScenarioConfig) -> Path:
    if args.out is not None:
        return args.out
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return Path(os.environ.get(OUT_ENV, "landau-hall-out")) / cfg.scenario


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def make_summary(cfg: ScenarioConfig, outcome: Outcome) -> dict:
    summary = {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "status": "pass" if outcome.passed else "fail",
        "package_version": __version__,
        "units": UNITS,
        "assertions": outcome.assertions,
        "results": outcome.results,
        "integers": outcome.integers,
    }
    jsonschema.validate(summary, summary_schema())
    return summary


def write_outputs(out: Path, cfg: ScenarioConfig, outcome: Outcome, summary: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in outcome.tables.items():
        atomic_write_text(out / name, _csv_text(header, rows))
    plots = {"schema_version": SCHEMA_VERSION, "plots": outcome.plots}
    atomic_write_text(out / "plots.json", json.dumps(plots, indent=2) + "\n")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "files": sorted(list(outcome.tables) + ["plots.json", "summary.json"]),
        "config": cfg.to_dict(),
    }
    atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    atomic_write_text(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")


def run(cfg: ScenarioConfig, out: Path, quiet: bool = False) -> int:
    outcome = RUNNERS[cfg.scenario](cfg)
    summary = make_summary(cfg, outcome)
    write_outputs(out, cfg, outcome, summary)
    if not quiet or not outcome.passed:
        for a in outcome.assertions:
            if not quiet or not a["passed"]:
                print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['name']}: {a['value']} {a['relation']} {a['limit']}")
        print(f"{cfg.scenario}: {summary['status']} ({out})")
    return EXIT_OK if outcome.passed else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        out = output_dir(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg, out, args.quiet)
    except (ParameterError, DegenerateFieldError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LandauError as exc:
        print(f"run aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
