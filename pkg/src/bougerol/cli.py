"""Command-line front end: ``bougerol list | run | density``.

Exit codes: 0 when every verdict is pass or low-power, 2 on a statistical
failure, 1 on a usage or runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import laws
from .verify import CATALOG, RunSettings, UnknownScenario, run_scenario, run_suite

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
MIN_SAMPLES = 1000
SEED_ENV = "BOUGEROL_SEED"

DENSITY_RANGES = {"a_t": (0.05, 20.0), "first_passage": (0.1, 10.0), "conditional_endpoint": (-5.0, 5.0)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for statistical failure here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str):
    """A float or a comma-separated list of floats."""
    parts = [float(p) for p in str(text).split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    return parts[0] if len(parts) == 1 else parts


def _range(text: str):
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("range needs lo < hi")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bougerol", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    ls = sub.add_parser("list", help="list catalog scenarios")
    ls.add_argument("--json", action="store_true")

    run = sub.add_parser("run", help="run scenarios and write JSON reports")
    run.add_argument("--scenario", help='scenario id, comma-separated ids, or "all"')
    for name in ("t", "x", "z", "mu", "alpha"):
        run.add_argument(f"--{name}", type=_floats)
    run.add_argument("--samples", type=int)
    run.add_argument("--grid", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--level", type=float)
    run.add_argument("--permutations", type=int)
    run.add_argument("--out")
    run.add_argument("--format", choices=["json"])
    run.add_argument("--dump-ecdf", dest="dump_ecdf")
    run.add_argument("--config", help="flat key=value file; flags take precedence")

    den = sub.add_parser("density", help="tabulate a closed-form density as CSV")
    den.add_argument("--law", required=True)
    den.add_argument("--t", type=float, default=1.0)
    den.add_argument("--u", type=float, default=1.0)
    den.add_argument("--level", type=float, default=1.0)
    den.add_argument("--mu", type=float, default=0.0)
    den.add_argument("--range", type=_range)
    den.add_argument("--points", type=int, default=201)
    den.add_argument("--out")
    return p


# ---------------------------------------------------------------------------
# list


def cmd_list(as_json: bool, out) -> int:
    if as_json:
        rows = [{"id": s.id, "identity": s.identity, "defaults": s.defaults,
                 "default_samples": s.default_samples} for s in CATALOG.values()]
        json.dump(rows, out, indent=2)
        out.write("\n")
    else:
        for s in CATALOG.values():
            out.write(f"{s.id}\t{s.identity}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# run

_RUN_DEFAULTS = {"scenario": None, "samples": None, "grid": 1024, "seed": None, "workers": 1,
                 "level": 1e-3, "permutations": 1999, "out": None, "format": "json", "dump_ecdf": None,
                 "t": None, "x": None, "z": None, "mu": None, "alpha": None}
_INT_KEYS = {"samples", "grid", "seed", "workers", "permutations"}
_FLOAT_KEYS = {"level"}
_LIST_KEYS = {"t", "x", "z", "mu", "alpha"}


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file (``#`` comments, blank lines ignored)."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _RUN_DEFAULTS:
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            elif key in _LIST_KEYS:
                out[key] = _floats(value)
            else:
                out[key] = value
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"{path}:{no}: bad value for {key}: {value!r}") from None
    return out


def resolve_run_config(args) -> dict:
    """Flags over config file over built-in defaults; seed falls back to the environment."""
    cfg = dict(_RUN_DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in _RUN_DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if cfg["seed"] is None and os.environ.get(SEED_ENV):
        try:
            cfg["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    if cfg["seed"] is None:
        raise UsageError(f"a seed is required (--seed, config, or {SEED_ENV})")
    if not 0 <= cfg["seed"] < 2 ** 64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    if not cfg["scenario"]:
        raise UsageError("--scenario is required")
    if cfg["samples"] is not None and cfg["samples"] < MIN_SAMPLES:
        raise UsageError(f"samples must be at least {MIN_SAMPLES}")
    g = cfg["grid"]
    if g < 16 or g & (g - 1):
        raise UsageError("grid steps must be a power of two, at least 16")
    if cfg["workers"] < 1:
        raise UsageError("workers must be positive")
    if not 0 < cfg["level"] < 1:
        raise UsageError("level must lie in (0, 1)")
    if cfg["format"] != "json":
        raise UsageError("only json output is supported")
    if isinstance(cfg["t"], list) or isinstance(cfg["mu"], list):
        raise UsageError("t and mu take a single value")
    return cfg


def _scenario_ids(spec: str) -> tuple[list[str], bool]:
    if spec == "all":
        return list(CATALOG), True
    ids = [s.strip() for s in spec.split(",") if s.strip()]
    for i in ids:
        if i not in CATALOG:
            raise UnknownScenario(i)
    return ids, len(ids) > 1


def write_ecdf(path: str, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "statistic", "ensemble", "value", "ecdf"])
        for r in reports:
            for stat, groups in r.ecdf_data.items():
                for label, xs in groups.items():
                    xs = np.sort(np.asarray(xs, dtype=float))
                    ranks = np.arange(1, xs.size + 1) / xs.size
                    for x, f in zip(xs, ranks):
                        w.writerow([r.scenario, stat, label, repr(float(x)), repr(float(f))])


def cmd_run(cfg: dict, out) -> int:
    ids, suite = _scenario_ids(cfg["scenario"])
    overrides = {k: cfg[k] for k in ("t", "x", "z", "mu", "alpha") if cfg[k] is not None}
    settings = RunSettings(seed=cfg["seed"], samples=cfg["samples"], grid=cfg["grid"], workers=cfg["workers"],
                           level=cfg["level"], permutations=cfg["permutations"], overrides=overrides)
    reports = run_suite(ids, settings) if suite else [run_scenario(ids[0], settings)]
    payload = [r.to_dict() for r in reports] if suite else reports[0].to_dict()
    text = json.dumps(payload, indent=2) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    if cfg["dump_ecdf"]:
        write_ecdf(cfg["dump_ecdf"], reports)
    for r in reports:
        print(f"{r.scenario}: {r.verdict}", file=sys.stderr)
    return EXIT_FAIL if any(r.verdict == "fail" for r in reports) else EXIT_OK


# ---------------------------------------------------------------------------
# density


def cmd_density(args, out) -> int:
    if args.law not in laws.LAWS:
        raise UsageError(f"unsupported law {args.law!r}; expected one of {', '.join(laws.LAWS)}")
    if args.points < 2:
        raise UsageError("points must be at least 2")
    lo, hi = args.range or DENSITY_RANGES[args.law]
    params = {"a_t": {"t": args.t}, "first_passage": {"level": args.level, "mu": args.mu},
              "conditional_endpoint": {"u": args.u}}[args.law]
    if args.law in ("a_t", "first_passage") and lo <= 0:
        raise UsageError("range must be positive for this law")
    x = np.linspace(lo, hi, args.points)
    curve = laws.tabulate(args.law, x, **params)
    mass = curve.mass()
    tail = laws.tail_mass(args.law, lo, hi, **params)
    header = (f"law={args.law} {curve.params_text()} range={lo:g}:{hi:g} points={args.points}\n"
              f"mass_in_range={mass:.10g} tail_mass={tail:.10g} total={mass + tail:.10g}")
    text = curve.to_csv(header)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if args.command == "list":
            return cmd_list(args.json, out)
        if args.command == "run":
            return cmd_run(resolve_run_config(args), out)
        return cmd_density(args, out)
    except UsageError as exc:
        print(f"bougerol: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except UnknownScenario as exc:
        print(f"bougerol: error: unknown scenario {exc.args[0]!r} (see `bougerol list`)", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # runtime errors map to exit 1 as well
        print(f"bougerol: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
