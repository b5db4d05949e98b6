"""Command line entry point: ``histmfa {ingest,mfa,simulate,distance}``.

Options may also come from a ``--config`` file of ``key=value`` lines using
the long option names (``quantiles=18``, ``plots=fan,scree``); options given
on the command line take precedence.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from . import plots as plotting
from .analysis import build_blocks, table_summaries
from .dataio import (
    DistributionalTable,
    ParseError,
    ValidationError,
    emit_histogram_json,
    emit_model_report,
    parse_histogram_json,
    parse_microdata_csv,
)
from .distributions import DomainError, decompose_distance, to_quantile_function, wasserstein_sq_integral
from .mfa import MOMENTS, global_mfa, moment_axis_diagnostics
from .simulate import SimulationDesign, simulate

log = logging.getLogger("histmfa")

EXIT_DOMAIN = 1
EXIT_INPUT = 2
PLOT_KINDS = ("fan", "circle", "plane", "scree")


class UsageError(ValueError):
    pass


def _parse_overrides(items) -> dict[str, int]:
    out = {}
    for item in items or ():
        for part in item.split(","):
            if not part.strip():
                continue
            var, sep, value = part.partition("=")
            if not sep:
                raise UsageError(f"--quantiles-for expects VAR=N, got {part!r}")
            out[var.strip()] = _positive_int(value)
    return out


def _positive_int(text) -> int:
    try:
        value = int(text)
    except (TypeError, ValueError):
        raise UsageError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise UsageError(f"expected a positive integer, got {text!r}")
    return value


def _parse_plane(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--plane expects A,B, got {text!r}") from None
    if a < 1 or b < 1 or a == b:
        raise UsageError(f"--plane axes must be distinct and >= 1, got {text!r}")
    return a - 1, b - 1


def _parse_plots(text: str | None) -> list[str]:
    if not text:
        return []
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in PLOT_KINDS]
    if bad:
        raise UsageError(f"unknown plot kind(s) {bad}; choose from {','.join(PLOT_KINDS)}")
    return kinds


def read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{n}: expected key=value")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def load_table(path: str, fmt: str | None, quantiles: int, overrides) -> DistributionalTable:
    if fmt is None:
        fmt = "json" if path.lower().endswith(".json") else "csv"
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "csv":
        return parse_microdata_csv(text, quantiles, overrides)
    if fmt == "json":
        return parse_histogram_json(text)
    raise UsageError(f"unknown format {fmt!r}")


def _write_text(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_ingest(args) -> int:
    table = load_table(args.input, args.format, args.quantiles, _parse_overrides(args.quantiles_for))
    _write_text(args.out, emit_histogram_json(table))
    log.info("wrote %d cells (%d units x %d variables)", len(table), len(table.units), len(table.variables))
    return 0


def _write_moments(model, table, out_dir):
    summaries = table_summaries(table)
    path = os.path.join(out_dir, "moments.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("unit", "variable", *MOMENTS, "degenerate"))
        for var in table.variables:
            for u, s in zip(table.units, summaries[var]):
                w.writerow((u, var, *(repr(float(getattr(s, m))) for m in MOMENTS), int(s.degenerate)))
    diag = moment_axis_diagnostics(model, summaries, coordinates="partial")
    path2 = os.path.join(out_dir, "moment_axes.csv")
    with open(path2, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("variable", "axis", *MOMENTS, "strongest"))
        for j, var in enumerate(model.variables):
            for a in range(model.rank):
                w.writerow((var, a + 1, *(f"{diag.correlations[m, a, j]:.6f}" for m in range(len(MOMENTS))),
                            diag.strongest_moment(a, j)))
    return [path, path2]


def cmd_mfa(args) -> int:
    overrides = _parse_overrides(args.quantiles_for)
    plane = _parse_plane(args.plane)
    kinds = _parse_plots(args.plots)
    table = load_table(args.input, args.format, args.quantiles, overrides)
    blocks = build_blocks(table, args.quantiles, overrides, args.extremes)
    model = global_mfa(blocks)
    out = args.out
    written = emit_model_report(model, table.units, out)
    written += _write_moments(model, table, out)

    specs = []
    for kind in kinds:
        if kind == "plane":
            for var in table.variables:
                specs.append(plotting.PlotSpec("plane", plane, (var,), args.labels, args.mean_shading))
            if len(table.variables) == 2:
                specs.append(plotting.PlotSpec("plane", plane, tuple(table.variables), args.labels,
                                               args.mean_shading, partial=False))
        else:
            specs.append(plotting.PlotSpec(kind, plane))
    for spec in specs:
        svg = plotting.render(spec, model, table)
        path = os.path.join(out, spec.filename)
        _write_text(path, svg)
        written.append(path)
    for path in written:
        log.info("wrote %s", path)
    pct = model.percent
    print(f"{model.rank} axes; first plane explains {pct[:2].sum():.2f}% of inertia")
    return 0


def cmd_simulate(args) -> int:
    design = SimulationDesign(n_units=args.units, n_draws=args.draws)
    data = simulate(args.seed, design)
    _write_text(args.out, data.to_csv())
    return 0


def cmd_distance(args) -> int:
    table = load_table(args.input, args.format, args.quantiles, _parse_overrides(args.quantiles_for))
    try:
        u1, u2 = args.units.split(",")
    except ValueError:
        raise UsageError(f"--units expects A,B, got {args.units!r}") from None
    f = to_quantile_function(table.cell(u1.strip(), args.variable))
    g = to_quantile_function(table.cell(u2.strip(), args.variable))
    location, scale, shape, rho = decompose_distance(f, g)
    d2 = wasserstein_sq_integral(f, g)
    print(f"d2={d2!r}")
    print(f"location={location!r}")
    print(f"scale={scale!r}")
    print(f"shape={shape!r}")
    print(f"rho={rho!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="histmfa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, quantiles=True):
        p.add_argument("--config", help="key=value file of option defaults")
        p.add_argument("--input", required=False)
        p.add_argument("--format", choices=("csv", "json"))
        if quantiles:
            p.add_argument("--quantiles", type=_positive_int, default=20,
                           help="bins per histogram (quantile count K); default 20")
            p.add_argument("--quantiles-for", action="append", metavar="VAR=N")

    p = sub.add_parser("ingest", help="convert microdata or json to canonical histogram json")
    common(p)
    p.add_argument("--out", help="output json file (default stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mfa", help="fit the model and write reports and plots")
    common(p)
    p.add_argument("--extremes", default="active",
                   help="active | supplementary | weight:W for the min and max columns")
    p.add_argument("--out", default="mfa_out")
    p.add_argument("--plane", default="1,2")
    p.add_argument("--plots", default="")
    p.add_argument("--labels", choices=("names", "means"), default="names")
    p.add_argument("--mean-shading", action="store_true")
    p.set_defaults(func=cmd_mfa)

    p = sub.add_parser("simulate", help="write seeded Gaussian/Beta microdata")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--units", type=_positive_int, default=10)
    p.add_argument("--draws", type=_positive_int, default=1000)
    p.add_argument("--out", help="output csv (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("distance", help="decompose the squared distance between two units")
    common(p)
    p.add_argument("--units", required=False, help="A,B")
    p.add_argument("--variable", required=False)
    p.set_defaults(func=cmd_distance)
    return parser


_REQUIRED = {"ingest": ("input",), "mfa": ("input",), "distance": ("input", "units", "variable")}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            config = read_config(args.config)
        except (OSError, UsageError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            print(f"error: unknown config key(s) {unknown}", file=sys.stderr)
            return EXIT_INPUT
        if "quantiles_for" in config:
            config["quantiles_for"] = [config["quantiles_for"]]
        if "mean_shading" in config:
            config["mean_shading"] = config["mean_shading"].lower() in ("1", "true", "yes")
        # string defaults go through each option's type converter
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    missing = [k for k in _REQUIRED.get(args.command, ()) if not getattr(args, k, None)]
    if missing:
        print(f"error: missing option(s) {', '.join('--' + m.replace('_', '-') for m in missing)}",
              file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (ParseError, ValidationError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
