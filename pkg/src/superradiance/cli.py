"""Command-line entry point: ``superradiance <subcommand> [flags]``.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import InvariantError
from .io import DataFormatError, read_trace_csv, sha256_file
from .observables import TimeSeries
from .scenario import ConfigError, load_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors (exit 1), keeping 2 for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _common(parser):
    parser.add_argument("--config", help="scenario JSON file")
    parser.add_argument("--out", help="output directory (default: config output.dir or ./out)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--delta", type=float, help="mean detuning in ueV; replaces the sweep grid")
    parser.add_argument("--nodes", type=int, help="Gauss-Hermite nodes for the wandering average (odd)")
    parser.add_argument("--seed", type=int, help="recorded in the output; no stochastic mode uses it yet")
    gate = parser.add_mutually_exclusive_group()
    gate.add_argument("--gated", dest="gated", action="store_const", const=True, help="only the two-emitter case")
    gate.add_argument("--ungated", dest="gated", action="store_const", const=False, help="only the single-emitter case")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="superradiance", description="Two-emitter waveguide superradiance simulations.")
    parser.add_argument("--version", action="version", version=f"superradiance {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("lifetime", "pulsed decay traces and tau(eps) summary, gated vs ungated"),
        ("hbt", "stationary g2(tau) traces, g2(0) and beat periods"),
        ("sweep", "dense detuning sweep of lifetime and HBT summaries"),
        ("fit", "joint fit of (gamma_d, sigma) to g2 data files"),
        ("oracle-check", "cross-check the solver against independent oracles"),
    ):
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "fit":
            p.add_argument("data", nargs="*", help="g2 CSV files (time_ns,value[,error])")
    plot = sub.add_parser("plot", help="SVG figure from trace CSV files")
    plot.add_argument("traces", nargs="*", help="trace CSV files")
    plot.add_argument("--out", default="out", help="output directory")
    plot.add_argument("--name", help="SVG file name (default <style>.svg)")
    plot.add_argument("--style", choices=("intensity", "g2"), help="default: from the trace header")
    scale = plot.add_mutually_exclusive_group()
    scale.add_argument("--log", dest="log", action="store_const", const=True)
    scale.add_argument("--linear", dest="log", action="store_const", const=False)
    return parser


def _overrides(args) -> dict:
    out = {}
    for key in ("out", "format", "delta", "nodes", "seed", "gated"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "data", None):
        out["datasets"] = list(args.data)
    return out


def _run_plot(args) -> list:
    from .plotting import export_plot

    if not args.traces:
        raise ConfigError("plot needs at least one trace file")
    traces, labels, inputs, style = [], [], [], args.style
    for name in args.traces:
        path = Path(name)
        if not path.exists():
            raise FileNotFoundError(f"trace file not found: {path}")
        times, values, _, header = read_trace_csv(path)
        traces.append(TimeSeries(times, values, "g2" if header.get("kind") == "g2" else "intensity"))
        label = header.get("mean_detuning_ueV")
        if label is not None:
            label = f"{label} ueV" + (f" ({'gated' if header.get('gated') == 'true' else 'ungated'})" if "gated" in header else "")
        labels.append(label)
        inputs.append({"path": str(path), "sha256": sha256_file(path), "config": json.loads(header.get("config", "null"))} if header.get("config") else {"path": str(path), "sha256": sha256_file(path)})
        kind = header.get("kind")
        if style is None and kind in ("g2", "intensity"):
            style = kind
    style = style or "intensity"
    out = Path(args.out) / (args.name or f"{style}.svg")
    config = {"command": "plot", "style": style, "log": args.log, "inputs": inputs}
    return [export_plot(traces, out, style=style, log=args.log, labels=labels, config=config)]


def run(args) -> int:
    from . import runs

    if args.command == "plot":
        paths = _run_plot(args)
        code = EXIT_OK
    else:
        scenario = load_scenario(args.config, args.command, _overrides(args))
        code = EXIT_OK
        if args.command == "lifetime":
            paths = runs.run_lifetime(scenario)
        elif args.command == "hbt":
            paths = runs.run_hbt(scenario)
        elif args.command == "sweep":
            paths = runs.run_sweep(scenario)
        elif args.command == "fit":
            paths = runs.run_fit(scenario)
        else:
            paths, results = runs.run_oracle_check(scenario)
            print(runs.format_table(results))
            if not all(r.passed for r in results):
                code = EXIT_NUMERICAL
    for p in paths:
        print(p)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (ConfigError, DataFormatError) as exc:
        print(f"superradiance: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"superradiance: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvariantError, np.linalg.LinAlgError, FloatingPointError, ValueError, ArithmeticError) as exc:
        print(f"superradiance: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
