# -*- coding: utf-8 -*-
"""
ZidLab — Command-line module.

Argument parsing, the command dispatcher and the exit-code contract:
0 success, 1 invalid input, 2 runtime failure.
"""

import argparse
import json
import logging
import sys
import time

from ..config import load_run_config, setup_logging, thread_count, validate_run_config
from ..errors import ValidationError, ZidlabError
from ..resources import DESCRIPTION, HELP_TEXT
from .commands import AnalyzeMixin, ExperimentMixin, DiscoverMixin
from .output import OutputWriter, read_provenance
from .workers import POOLS

log = logging.getLogger(__name__)

VERSION = "1.0.0"


# ============================================================
# ARGUMENT TYPES
# ============================================================


def int_list(text):
    """'1,2,5' or an inclusive range '1..30'."""
    values = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..", 1)
                values.extend(range(int(lo), int(hi) + 1))
            elif part:
                values.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting with status 2."""

    def error(self, message):
        raise ValidationError(message)


def build_parser():
    parser = _Parser(
        prog="zidlab", description=DESCRIPTION, epilog=HELP_TEXT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"zidlab {VERSION}")
    parser.add_argument("--config", help="zidlab.toml run configuration")
    parser.add_argument("--seed", type=int, help="base seed (default 0)")
    parser.add_argument("--out", help="output directory (default results)")
    parser.add_argument("--format", choices=["csv", "json", "svg"],
                        help="data format; svg also writes the CSV data")
    parser.add_argument("--state-cap", type=int, help="maximum number of enumerated states")
    parser.add_argument("--pool", choices=POOLS,
                        help="parallel experiment runs on processes (default) or threads")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress logging")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, text in (("analyze", "density, bottleneck cut and ZID verdict"),
                       ("enumerate", "dump the induced graph as JSON")):
        p = sub.add_parser(name, help=text)
        p.add_argument("map")
        p.add_argument("--variant", type=int, default=0, help="variant M_n of the map")
        if name == "analyze":
            p.add_argument("--traces", type=int, help="random episodes for the incentive delay")
            p.add_argument("--trace-horizon", type=int)
            p.add_argument("--d", dest="trace_delay", type=int,
                           help="record traces under delayed shaping with this d")

    p = sub.add_parser("explore", help="one random-exploration run")
    p.add_argument("map")
    p.add_argument("--variant", type=int, default=0)
    p.add_argument("--horizon", type=int, default=12)
    p.add_argument("--steps", type=int, help="step budget")

    p = sub.add_parser("density-experiment", help="exit rate vs reward density")
    p.add_argument("--map")
    p.add_argument("--variants", type=int_list)
    p.add_argument("--horizons", type=int_list)
    p.add_argument("--steps", type=int, help="step budget per run")
    p.add_argument("--seeds", type=int_list)
    p.add_argument("--oracle-only", action="store_true", help="DP table only, no simulation")

    p = sub.add_parser("delay-experiment", help="tabular learning curves per shaping delay")
    p.add_argument("--map")
    p.add_argument("--d", dest="delays", type=int_list, help="shaping delays")
    p.add_argument("--seeds", type=int_list)
    p.add_argument("--steps", type=int, help="training steps per run")
    p.add_argument("--eval-interval", type=int)
    p.add_argument("--no-baseline", action="store_true", help="skip the unshaped condition")
    p.add_argument("--strict-paper-sign", "--reverse-shaping-sign", dest="strict_paper_sign",
                   action="store_true",
                   help="shape with r + gamma*phi(s) - phi(s')")
    p.add_argument("--no-flush", action="store_true",
                   help="keep pending bonuses at truncation")

    p = sub.add_parser("discover", help="spectral bottleneck discovery")
    p.add_argument("--map")
    p.add_argument("--agents", type=int_list)
    p.add_argument("--steps", type=int, help="exploration steps per run")
    p.add_argument("--interval", type=int, help="episodes between clusterings")
    p.add_argument("--runs", type=int)
    p.add_argument("--weighting", choices=["unit", "visits"])
    p.add_argument("--local-graph", choices=["cumulative", "recent"],
                   help="cluster every transition so far, or only the latest window")

    p = sub.add_parser("provenance", help="print the config recorded in a result file")
    p.add_argument("file")
    return parser


# ============================================================
# DISPATCH
# ============================================================

# flag attribute -> (config section, key)
OVERRIDES = {
    "seed": ("output", "seed"),
    "out": ("output", "out"),
    "format": ("output", "format"),
    "state_cap": ("output", "state_cap"),
    "pool": ("output", "pool"),
}

COMMAND_OVERRIDES = {
    "analyze": {
        "traces": ("analyze", "trace_episodes"), "trace_horizon": ("analyze", "trace_horizon"),
        "trace_delay": ("shaping", "d"),
    },
    "explore": {"steps": ("explore", "step_budget")},
    "density-experiment": {
        "map": ("explore", "map"), "variants": ("explore", "variants"),
        "horizons": ("explore", "horizons"), "steps": ("explore", "step_budget"),
        "seeds": ("explore", "seeds"),
    },
    "delay-experiment": {
        "map": ("learning", "map"), "delays": ("learning", "delays"),
        "seeds": ("learning", "seeds"), "steps": ("learning", "total_steps"),
        "eval_interval": ("learning", "eval_interval"),
    },
    "discover": {
        "map": ("discovery", "map"), "agents": ("discovery", "agents"),
        "steps": ("discovery", "total_steps"), "interval": ("discovery", "interval"),
        "runs": ("discovery", "runs"), "weighting": ("discovery", "weighting"),
        "local_graph": ("discovery", "local_graph"),
    },
}

# sections echoed into each command's output files
ECHO = {
    "analyze": ("output", "analyze", "shaping"),
    "enumerate": ("output",),
    "explore": ("output", "explore"),
    "density-experiment": ("output", "explore"),
    "delay-experiment": ("output", "learning", "shaping"),
    "discover": ("output", "discovery"),
}


def build_run_config(args):
    config = load_run_config(args.config)
    overrides = dict(OVERRIDES)
    overrides.update(COMMAND_OVERRIDES.get(args.command, {}))
    for attr, (section, key) in overrides.items():
        value = getattr(args, attr, None)
        if value is not None:
            config[section][key] = value
    if getattr(args, "trace_delay", None) is not None:
        config["analyze"]["trace_shaping"] = True
    if getattr(args, "no_baseline", False):
        config["learning"]["baseline"] = False
    if getattr(args, "strict_paper_sign", False):
        config["shaping"]["strict_paper_sign"] = True
    if getattr(args, "no_flush", False):
        config["shaping"]["flush_on_truncation"] = False
    return validate_run_config(config)


class Zidlab(AnalyzeMixin, ExperimentMixin, DiscoverMixin):
    """One CLI invocation: parsed flags, merged config and an output writer."""

    def __init__(self, args, stdout=None):
        self.args = args
        self.stdout = stdout or sys.stdout
        self.config = build_run_config(args)
        self.threads = thread_count(self.config["output"]["threads"])
        self.pool = self.config["output"]["pool"]
        self.out = OutputWriter(self.config["output"]["out"], self.echo(), VERSION)

    def echo(self):
        """The RunConfig recorded in every output file."""
        record = {"command": self.args.command}
        for attr in ("map", "variant", "horizon"):
            if getattr(self.args, attr, None) is not None:
                record[attr] = getattr(self.args, attr)
        for section in ECHO.get(self.args.command, ()):
            record[section] = self.config[section]
        return record

    @property
    def wants_svg(self):
        return self.config["output"]["format"] == "svg"

    def emit_line(self, text):
        print(text, file=self.stdout)

    def emit(self, mapping):
        for key, value in mapping.items():
            self.emit_line(f"{key}: {value}")

    def write_rows(self, name, rows, columns):
        if self.config["output"]["format"] == "json":
            return self.out.write_json(f"{name}.json", rows)
        return self.out.write_csv(f"{name}.csv", rows, columns)

    def run(self):
        handler = getattr(self, "cmd_" + self.args.command.replace("-", "_"))
        started = time.perf_counter()
        result = handler()
        log.info("%s finished in %.2fs", self.args.command, time.perf_counter() - started)
        self.out.write_json("run.json", {
            "files": [p.name for p in self.out.written],
            "wall_clock_seconds": round(time.perf_counter() - started, 3),
        })
        return result


def main(argv=None, stdout=None):
    """Run the CLI; returns the process exit code."""
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.verbose)
        if args.command == "provenance":
            print(json.dumps(read_provenance(args.file), indent=2, sort_keys=True), file=stdout)
            return 0
        Zidlab(args, stdout).run()
    except ZidlabError as e:
        print(f"zidlab: error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        log.debug("unexpected failure", exc_info=True)
        print(f"zidlab: internal error: {e}", file=sys.stderr)
        return 2
    return 0


__all__ = ["main", "build_parser", "Zidlab", "int_list", "VERSION"]
