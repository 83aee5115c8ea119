"""Command line entry point: ``simulate``, ``sweep`` and ``spectrum``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from imdrive import analysis
from imdrive.errors import IntegrationDivergedError, InvalidInputError, InvalidWindowError
from imdrive.scenario import (
    ConfigError,
    SimulationConfig,
    format_report,
    load_config,
    read_timeseries,
    run_simulation,
    switching_sweep,
    write_outputs,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


def _config(args, **overrides) -> SimulationConfig:
    if args.config is None:
        return SimulationConfig().replace(**{k: v for k, v in overrides.items() if v is not None})
    return load_config(args.config, **overrides)


def _fsw_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad frequency list {text!r}") from None


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start,stop, got {text!r}") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imdrive", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario")
    sim.add_argument("--config", type=Path)
    sim.add_argument("--fsw", type=float)
    sim.add_argument("--source", choices=("ideal", "svpwm"))
    sim.add_argument("--t-end", type=float)
    sim.add_argument("--out", type=Path, required=True)

    sw = sub.add_parser("sweep", help="switching-frequency sweep against an ideal source")
    sw.add_argument("--config", type=Path)
    sw.add_argument("--fsw", type=_fsw_list, default=[1000.0, 3500.0, 7000.0])
    sw.add_argument("--t-end", type=float)
    sw.add_argument("--out", type=Path, required=True)

    sp = sub.add_parser("spectrum", help="re-analyse a column of a timeseries CSV")
    sp.add_argument("--in", dest="infile", type=Path, required=True)
    sp.add_argument("--column", required=True)
    sp.add_argument("--f1", type=float, default=60.0)
    sp.add_argument("--window", type=_window, help="start,stop in seconds")
    sp.add_argument("--out", type=Path, required=True)
    return parser


def _spectrum_command(args) -> int:
    data = read_timeseries(args.infile)
    if args.column not in data:
        raise ConfigError(f"column {args.column!r} not in {sorted(data)}")
    t = data["t"]
    w = analysis.Waveform(data[args.column], 1.0 / (t[1] - t[0]), t[0])
    if args.window:
        w = w.window(*args.window)
    sp = analysis.spectrum(w, args.f1)
    args.out.mkdir(parents=True, exist_ok=True)
    analysis.write_spectrum_csv(sp, args.out / f"spectrum_{args.column}.csv")
    lines = [f"column: {args.column}", f"window: {w.start_time:.9g} s, {w.samples.size} samples",
             f"fundamental {args.f1:g} Hz: {sp.magnitude_at(args.f1):.9g}"]
    try:
        lines.append(f"thd: {analysis.thd(sp, args.f1):.9g}")
    except ValueError:
        lines.append("thd: undefined")
    lines.append(f"ripple_pp: {analysis.ripple_pp(w, args.f1):.9g}")
    for f, m in analysis.dominant_components(sp, 10, exclude_below=1.5 * args.f1):
        lines.append(f"  {f:12.6g} Hz  {m:.9g}")
    (args.out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            cfg = _config(args, fsw=args.fsw, source=args.source, t_end=args.t_end)
            result = run_simulation(cfg)
            write_outputs(result, args.out)
            print(format_report(result), end="")
        elif args.command == "sweep":
            cfg = _config(args, t_end=args.t_end)
            report = switching_sweep(cfg, args.fsw)
            write_outputs(report, args.out)
            print(format_report(report), end="")
        else:
            return _spectrum_command(args)
    except IntegrationDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (InvalidInputError, InvalidWindowError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
