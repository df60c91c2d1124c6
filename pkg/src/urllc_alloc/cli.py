"""Command-line entry point: ``solve``, ``sweep`` and ``availability``."""

import argparse
import sys

from .exceptions import NumericError
from .formats import (
    ConfigError,
    emit_availability_csv,
    emit_availability_plotdata,
    emit_csv,
    emit_plotdata,
    read_config,
    write_output,
)
from .harness import SCHEMES, SWEEP_PARAMS, SweepConfig, SweepRow, network_availability, run_sweep, solve_point

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

# flag name -> (SweepConfig field, converter)
SCENARIO_FLAGS = {
    "scheme": ("scheme", str),
    "d1": ("d1", float),
    "d2": ("d2", float),
    "d3": ("d3", float),
    "bits": ("bits", int),
    "symbols": ("symbols", int),
    "energy-joule": ("energy_joule", float),
    "eps1-max": ("eps1_max", float),
    "h1": ("h1", float),
    "h2": ("h2", float),
    "h3": ("h3", float),
    "devices": ("devices", int),
    "device-spacing": ("device_spacing", float),
}
SWEEP_FLAGS = {"sweep": str, "values": str, "format": str, "workers": int}
# availability studies run at a tenfold larger budget than sweeps
AVAILABILITY_ENERGY_JOULE = 5e-4
AVAILABILITY_FLAGS = {"draws": int, "seed": int, "target": float}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_scenario_flags(p):
    for flag, (_, conv) in SCENARIO_FLAGS.items():
        kw = {"type": conv, "default": None}
        if flag == "scheme":
            kw["choices"] = ("all",) + SCHEMES
        p.add_argument(f"--{flag}", **kw)


def build_parser():
    parser = _Parser(prog="urllc-alloc", description="Short-packet power and blocklength allocation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="solve one scenario with one scheme")
    _add_scenario_flags(solve)
    solve.add_argument("--format", choices=("csv", "plotdata"), default=None)
    solve.add_argument("--out", default="-")

    commands = (
        ("sweep", "solve every scheme over a parameter sweep", {}),
        ("availability", "fraction of fading draws meeting every target", AVAILABILITY_FLAGS),
    )
    for name, text, extra in commands:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config")
        p.add_argument("--out", default="-")
        _add_scenario_flags(p)
        p.add_argument("--sweep", choices=SWEEP_PARAMS, default=None)
        p.add_argument("--values", default=None, help="comma-separated, strictly increasing")
        p.add_argument("--format", choices=("csv", "plotdata"), default=None)
        p.add_argument("--workers", type=int, default=None)
        for flag, conv in extra.items():
            p.add_argument(f"--{flag}", type=conv, default=None)
    return parser


def _allowed_keys(command):
    keys = set(SCENARIO_FLAGS) | set(SWEEP_FLAGS)
    if command == "availability":
        keys |= set(AVAILABILITY_FLAGS)
    return keys


def _merge(args, command):
    """Config file values overridden by explicit flags, keyed by flag name."""
    merged = {}
    if getattr(args, "config", None):
        merged.update(read_config(args.config, _allowed_keys(command)))
    for key in sorted(_allowed_keys(command)):
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            merged[key] = v
    return merged


def _convert(key, raw, conv):
    if not isinstance(raw, str):
        return raw
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def _config_from(merged):
    kw = {}
    for flag, (name, conv) in SCENARIO_FLAGS.items():
        if flag in merged:
            kw[name] = _convert(flag, merged[flag], conv)
    param = merged.get("sweep")
    if param is not None:
        if param not in SWEEP_PARAMS:
            raise ConfigError(f"unknown sweep parameter {param!r}")
        conv = float if param in ("d1", "E_tot") else int
        raw = merged.get("values")
        if not raw:
            raise ConfigError("sweep needs values")
        kw["sweep_param"] = param
        kw["sweep_values"] = tuple(_convert("values", v.strip(), conv) for v in str(raw).split(","))
    elif merged.get("values"):
        raise ConfigError("values given without sweep")
    return SweepConfig(**kw)


def _format(merged):
    fmt = merged.get("format", "csv")
    if fmt not in ("csv", "plotdata"):
        raise ConfigError(f"unknown format {fmt!r}")
    return fmt


def _required(merged, key, conv):
    if key not in merged:
        raise ConfigError(f"missing required setting {key!r}")
    return _convert(key, merged[key], conv)


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        merged = _merge(args, args.command)
        fmt = _format(merged)
        if args.command == "solve":
            cfg = _config_from(merged)
            if cfg.scheme == "all":
                raise ConfigError("solve needs a single --scheme")
            row = SweepRow(cfg.scheme, None, None, solve_point(cfg, cfg.scheme))
            write_output(args.out, (emit_csv if fmt == "csv" else emit_plotdata)([row]))
            return EXIT_OK if row.outcome.feasible else EXIT_INFEASIBLE
        if args.command == "availability":
            merged.setdefault("energy-joule", AVAILABILITY_ENERGY_JOULE)
        cfg = _config_from(merged)
        workers = _convert("workers", merged.get("workers"), int)
        if args.command == "sweep":
            rows = run_sweep(cfg, workers=workers)
            write_output(args.out, (emit_csv if fmt == "csv" else emit_plotdata)(rows))
            return EXIT_OK
        reports = network_availability(
            cfg,
            _required(merged, "draws", int),
            _required(merged, "seed", int),
            _required(merged, "target", float),
            workers=workers,
        )
        emit = emit_availability_csv if fmt == "csv" else emit_availability_plotdata
        write_output(args.out, emit(reports))
        return EXIT_OK
    except (ValueError, NumericError, OSError) as exc:
        print(f"urllc-alloc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
