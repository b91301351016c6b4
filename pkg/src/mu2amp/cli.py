"""``mu2amp`` command-line front end.

Every subcommand writes one table as CSV (default) or JSON.  A CSV starts
with ``#`` comment lines (the resolved flags, then any metadata) followed by
a header row.  Exit codes: 0 success, 1 usage, 2 numerical failure,
3 verify failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Callable, Sequence

import numpy as np

from . import report
from .design import AmplifierSpec
from .errors import CutoffInsufficient, InvalidSpec, Mu2AmpError, SingularOrdering
from .quasiprob import GridSpec

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# name -> (type, default, help); default None with required=True means mandatory
SPEC_OPTS = {
    "mu2": (float, None, "noise parameter mu^2"),
    "gain": (float, None, "overall amplitude gain G"),
    "ncut": (int, 1, "number cutoff N"),
    "nbar": (float, None, "ancilla thermal occupation (default optimal)"),
}

COMMANDS: dict[str, dict] = {
    "design": {
        "help": "stage gains and operating-region amplitude",
        "opts": {
            "mu2": (_float_list, None, "comma-separated mu^2 values"),
            "gain": (float, None, "overall amplitude gain G"),
            "nbar": (float, None, "ancilla thermal occupation (default optimal)"),
        },
        "required": ["mu2", "gain"],
    },
    "table1": {
        "help": "operating-region summary for immaculate, perfect and ideal devices",
        "opts": {"gain": (float, None, "overall amplitude gain G"), "ncut": (int, 1, "number cutoff N")},
        "required": ["gain"],
    },
    "sweep": {
        "help": "closed-form metric versus input amplitude",
        "opts": {
            "metric": (str, "pfp", "one of " + ", ".join(report.SWEEP_METRICS)),
            **SPEC_OPTS,
            "alpha_max": (float, 1.0, "largest |alpha|"),
            "steps": (int, 201, "number of samples"),
        },
        "required": ["mu2", "gain"],
    },
    "contour": {
        "help": "operating-region PFP over (mu^2, G^2)",
        "opts": {
            "ncut": (int, 2, "number cutoff N"),
            "mu2_min": (float, 0.0, "smallest mu^2"),
            "mu2_max": (float, 1.0, "largest mu^2"),
            "mu2_steps": (int, 101, "mu^2 samples"),
            "gain2_min": (float, 1.0, "smallest G^2"),
            "gain2_max": (float, 100.0, "largest G^2"),
            "gain2_steps": (int, 100, "G^2 samples"),
            "log": (_bool, False, "log spacing on both axes"),
            "mu2_values": (_float_list, None, "explicit mu^2 values (overrides range)"),
            "gain2_values": (_float_list, None, "explicit G^2 values (overrides range)"),
        },
        "required": [],
    },
    "qgrid": {
        "help": "output Q function on a phase-space grid",
        "opts": {
            **SPEC_OPTS,
            "alpha": (complex, None, "input amplitude (python complex syntax, e.g. 0.11 or 0.1+0.2j)"),
            "grid": (str, "-3,3,-3,3,201,201", "re_min,re_max,im_min,im_max,n_re,n_im"),
        },
        "required": ["mu2", "gain", "alpha"],
    },
    "snr": {
        "help": "output SNRs versus input amplitude",
        "opts": {
            "mode": (str, "quadrature", "quadrature or number"),
            **SPEC_OPTS,
            "alpha_max": (float, 2.0, "largest alpha"),
            "steps": (int, 201, "number of samples"),
        },
        "required": ["mu2", "gain"],
    },
    "verify": {
        "help": "channel/oracle equivalence and invariant checks",
        "opts": {
            "full": (_bool, False, "include the high-gain cases"),
            "cutoff": (int, None, "force the output cutoff of every amplification"),
        },
        "required": [],
    },
}

GLOBAL_OPTS = {
    "format": (str, "csv", "csv or json"),
    "precision": (int, 9, "significant digits"),
    "output": (str, None, "output file (default stdout)"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mu2amp", description="mu^2-amplifier datasets and checks")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, cmd in COMMANDS.items():
        p = sub.add_parser(name, help=cmd["help"])
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        for key, (typ, default, help_) in {**cmd["opts"], **GLOBAL_OPTS}.items():
            flag = "--" + key.replace("_", "-")
            if typ is _bool:
                p.add_argument(flag, nargs="?", const=True, type=_bool, default=None, help=help_)
            else:
                p.add_argument(flag, type=typ, default=None, help=f"{help_} (default {default})" if default is not None else help_)
    return parser


def read_config(path: str, allowed: dict) -> dict:
    out = {}
    try:
        lines = open(path, encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for i, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in allowed:
            raise UsageError(f"{path}:{i}: unknown key {key!r}")
        typ = allowed[key][0]
        try:
            out[key] = typ(value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{path}:{i}: bad value for {key}: {exc}") from None
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags; check required keys."""
    cmd = COMMANDS[args.command]
    allowed = {**cmd["opts"], **GLOBAL_OPTS}
    opts = {k: v[1] for k, v in allowed.items()}
    if args.config:
        opts.update(read_config(args.config, allowed))
    for k in allowed:
        v = getattr(args, k)
        if v is not None:
            opts[k] = v
    missing = [k for k in cmd["required"] if opts.get(k) is None]
    if missing:
        raise UsageError(f"{args.command}: missing " + ", ".join("--" + k.replace("_", "-") for k in missing))
    if opts["format"] not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    if not 1 <= opts["precision"] <= 17:
        raise UsageError("--precision must be between 1 and 17")
    return opts


def fmt(x, precision: int):
    """Value at ``precision`` significant digits, as the shortest round-trip float."""
    if x is None or isinstance(x, (str, bool)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.{precision}g}")


def _csv_cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _flag_text(command: str, opts: dict) -> str:
    parts = ["mu2amp", command]
    for k, v in opts.items():
        if v is None or k == "output":
            continue
        if isinstance(v, list):
            v = ",".join(repr(float(x)) for x in v)
        parts.append(f"--{k.replace('_', '-')}={v}")
    return " ".join(parts)


def render(table: report.Table, command: str, opts: dict) -> str:
    p = opts["precision"]
    rows = [[fmt(v, p) for v in r] for r in table.rows]
    meta = {k: fmt(v, p) for k, v in table.meta.items()}
    flags = _flag_text(command, opts)
    if opts["format"] == "json":
        doc = {"flags": flags, "meta": meta, "columns": table.columns, "rows": rows}
        return json.dumps(doc, allow_nan=True) + "\n"
    lines = ["# " + flags]
    if meta:
        lines.append("# " + " ".join(f"{k}={_csv_cell(v)}" for k, v in meta.items()))
    lines.append(",".join(table.columns))
    lines.extend(",".join(_csv_cell(v) for v in r) for r in rows)
    return "\n".join(lines) + "\n"


def _spec(opts: dict) -> AmplifierSpec:
    return AmplifierSpec(mu2=opts["mu2"], gain=opts["gain"], ncut=opts["ncut"], nbar=opts["nbar"])


def _axis(lo: float, hi: float, n: int, log: bool) -> np.ndarray:
    if n < 1:
        raise UsageError("axis needs at least one sample")
    if log:
        if lo <= 0:
            raise UsageError("log spacing needs a positive lower bound")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def build_table(command: str, opts: dict) -> report.Table:
    if command == "design":
        return report.design_table(opts["mu2"], opts["gain"], opts["nbar"])
    if command == "table1":
        return report.table1(opts["gain"], opts["ncut"])
    if command == "sweep":
        if opts["metric"] not in report.SWEEP_METRICS:
            raise UsageError(f"--metric must be one of {', '.join(report.SWEEP_METRICS)}")
        if opts["steps"] < 2:
            raise UsageError("--steps must be >= 2")
        return report.sweep(opts["metric"], _spec(opts), opts["alpha_max"], opts["steps"])
    if command == "contour":
        mu2s = opts["mu2_values"] or _axis(opts["mu2_min"], opts["mu2_max"], opts["mu2_steps"], opts["log"])
        g2s = opts["gain2_values"] or _axis(opts["gain2_min"], opts["gain2_max"], opts["gain2_steps"], opts["log"])
        if min(g2s) < 1 or min(mu2s) < 0:
            raise UsageError("G^2 values must be >= 1 and mu^2 values >= 0")
        return report.contour(opts["ncut"], mu2s, g2s)
    if command == "qgrid":
        return report.qgrid(_spec(opts), opts["alpha"], GridSpec.parse(opts["grid"]))
    if command == "snr":
        if opts["mode"] not in ("quadrature", "number"):
            raise UsageError("--mode must be quadrature or number")
        if opts["steps"] < 2:
            raise UsageError("--steps must be >= 2")
        return report.snr(opts["mode"], _spec(opts), opts["alpha_max"], opts["steps"])
    raise UsageError(f"unknown command {command!r}")


def run_verify(opts: dict, channel: Callable | None, out) -> int:
    from . import verify

    kwargs = {"full": opts["full"], "cutoff": opts["cutoff"]}
    if channel is not None:
        kwargs["channel"] = channel
    checks = verify.run_checks(**kwargs)
    for c in checks:
        print(c.line(), file=out)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=out)
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def main(argv: Sequence[str] | None = None, channel: Callable | None = None) -> int:
    """Entry point; ``channel`` replaces the Kraus channel inside ``verify`` (for testing)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        opts = resolve(args)
    except UsageError as exc:
        print(f"mu2amp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "verify":
            return run_verify(opts, channel, sys.stdout)
        text = render(build_table(args.command, opts), args.command, opts)
    except UsageError as exc:
        print(f"mu2amp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidSpec, SingularOrdering) as exc:
        print(f"mu2amp: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CutoffInsufficient, Mu2AmpError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"mu2amp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if opts["output"]:
        with open(opts["output"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
