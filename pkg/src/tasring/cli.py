"""Command-line front end for scenario sweeps.

Every grid axis flag (--model, --topology, --reconfig, --pi, --tau,
--rho) accepts a comma-separated list; the sweep runs their cross
product in a fixed axis order.  Settings may also come from a plain
key=value file via --config, with command-line flags taking precedence.
Exit status: 0 on success, 2 on a validation problem, 1 when a run
aborts on an internal invariant failure.
"""

from __future__ import annotations

import argparse
import sys

from .engine import SimulationInvariantError
from .harness import (
    FIGURE_FAMILIES,
    Scenario,
    ScenarioError,
    rows_to_csv,
    scenario_grid,
    summarize,
    sweep_rows,
    write_csv,
)

DEFAULTS = {
    "model": "centralized",
    "topology": "uni",
    "reconfig": "on",
    "pi": "20",
    "tau": "5",
    "rho": "1.0",
    "cycle-time": "50",
    "init-ratio": "0.2",
    "duration": "10",
    "seed": "1",
    "replications": "1",
}

_FLAG_HELP = {
    "model": "configuration model(s): centralized | decentralized",
    "topology": "ring topology(ies): uni | bi",
    "reconfig": "runtime gate reconfiguration: on | off",
    "pi": "per-source stream request rate(s), 1/s",
    "tau": "mean stream lifetime(s), s",
    "rho": "best-effort load fraction(s) of one ring link",
    "cycle-time": "gating cycle time, microseconds",
    "init-ratio": "initial traffic-window share of the cycle",
    "duration": "simulated time per replication, seconds",
    "seed": "base seed; replications split deterministically from it",
    "replications": "independent replications per grid cell",
}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("on", "true", "1", "yes"):
        return True
    if lowered in ("off", "false", "0", "no"):
        return False
    raise ScenarioError(f"expected on/off, got {text!r}")


def _parse_list(text: str, convert) -> list:
    items = [part.strip() for part in text.split(",")]
    if any(not part for part in items):
        raise ScenarioError(f"empty element in list {text!r}")
    return [convert(part) for part in items]


def load_config(path: str) -> dict[str, str]:
    settings: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or not key or not value:
                raise ScenarioError(f"{path}:{number}: expected key=value")
            if key not in DEFAULTS:
                raise ScenarioError(f"{path}:{number}: unknown setting {key!r}")
            settings[key] = value
    return settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tasring",
        description="Sweep gate-scheduled ring scenarios and emit per-run CSV rows.",
    )
    parser.add_argument("--config", metavar="FILE",
                        help="key=value settings file; flags override it")
    for name in DEFAULTS:
        parser.add_argument(f"--{name}", help=_FLAG_HELP[name])
    parser.add_argument("--out", metavar="CSV",
                        help="write rows to this file instead of stdout")
    parser.add_argument("--summary", metavar="FAMILY",
                        choices=sorted(FIGURE_FAMILIES),
                        help="print a grouped mean table for one figure family")
    return parser


def build_scenarios(settings: dict[str, str]) -> list[Scenario]:
    base = Scenario(
        ct_ns=int(round(float(settings["cycle-time"]) * 1000)),
        init_ratio=float(settings["init-ratio"]),
        duration_s=float(settings["duration"]),
        seed=int(settings["seed"]),
        replications=int(settings["replications"]),
    )
    return scenario_grid(
        base,
        model=_parse_list(settings["model"], str),
        topology=_parse_list(settings["topology"], str),
        reconfig=_parse_list(settings["reconfig"], _parse_bool),
        pi=_parse_list(settings["pi"], float),
        tau_s=_parse_list(settings["tau"], float),
        rho=_parse_list(settings["rho"], float),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = dict(DEFAULTS)
        if args.config:
            settings.update(load_config(args.config))
        for name in DEFAULTS:
            override = getattr(args, name.replace("-", "_"))
            if override is not None:
                settings[name] = override
        scenarios = build_scenarios(settings)
        rows = sweep_rows(scenarios)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"tasring: {exc}", file=sys.stderr)
        return 2
    except SimulationInvariantError as exc:
        print(f"tasring: invariant failure: {exc}", file=sys.stderr)
        return 1

    if args.out:
        try:
            write_csv(rows, args.out)
        except OSError as exc:
            print(f"tasring: {exc}", file=sys.stderr)
            return 2
    elif not args.summary:
        sys.stdout.write(rows_to_csv(rows))
    if args.summary:
        sys.stdout.write(summarize(rows, args.summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
