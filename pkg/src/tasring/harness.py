"""Experiment harness: scenario grids, replications, CSV output, summaries.

A Scenario pins every knob of one experiment cell.  Sweeps expand a grid
of scenarios into one CSV row per (scenario, replication), ordered by
grid position and replication index, so a rerun with the same seeds is
byte-identical.  Replication seeds derive from the scenario seed through
a fixed splitting rule (numpy SeedSequence over (seed, replication)),
which makes any cell reproducible on its own.

Summaries group rows the way the result figures do: one panel per
(model, topology, reconfiguration, best-effort load) and one line per
(request rate, lifetime) pair, averaged over replications.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields, replace

from .engine import RunConfig, run_once
from .metrics import REPORT_COLUMNS, MetricsReport

MODELS = ("centralized", "decentralized")
TOPOLOGIES = ("uni", "bi")
RHO_CHOICES = (0.1, 1.0, 2.0)

SCENARIO_COLUMNS = (
    "model",
    "topology",
    "reconfig",
    "pi",
    "tau_s",
    "rho",
    "ct_ns",
    "init_ratio",
    "duration_s",
    "seed",
    "replication",
)
CSV_COLUMNS = SCENARIO_COLUMNS + REPORT_COLUMNS

# Admitted-traffic max-delay bounds (microseconds) used by the max-delay
# summary family to flag suspicious rows; derived from the acceptance
# bounds for the centralized model.
MAX_DELAY_BOUND_US = {
    ("uni", False): 66.0,
    ("uni", True): 115.5,
    ("bi", False): 62.0,
    ("bi", True): 300.0,
}

FIGURE_FAMILIES = {
    "mean-delay": ("st_mean_delay_us", "be_mean_delay_us"),
    "max-delay": ("st_max_delay_us", "be_max_delay_us"),
    "admission": ("admission_ratio",),
    "throughput": ("st_throughput_bps", "be_throughput_bps"),
    "loss": ("st_loss_ratio", "be_loss_ratio"),
    "signaling-delay": (
        "signaling_mean_delay_us",
        "signaling_min_delay_us",
        "signaling_max_delay_us",
    ),
    "overhead": ("signaling_overhead_bps",),
}


class ScenarioError(ValueError):
    """A scenario field lies outside its supported range."""


@dataclass(frozen=True)
class Scenario:
    """One experiment cell before replication expansion.

    pi is the per-source stream request rate (1/s), tau_s the mean
    stream lifetime, rho the per-direction best-effort load as a
    fraction of one 1 Gb/s ring link.  pi = 0 and rho = 0 switch the
    respective traffic source off entirely.
    """

    model: str = "centralized"
    topology: str = "uni"
    reconfig: bool = True
    pi: float = 20.0
    tau_s: float = 5.0
    rho: float = 1.0
    ct_ns: int = 50_000
    init_ratio: float = 0.2
    duration_s: float = 10.0
    seed: int = 1
    replications: int = 1

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ScenarioError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.topology not in TOPOLOGIES:
            raise ScenarioError(
                f"topology must be one of {TOPOLOGIES}, got {self.topology!r}"
            )
        if not isinstance(self.reconfig, bool):
            raise ScenarioError("reconfig must be a boolean")
        if self.pi != 0 and not 1.0 <= self.pi <= 20.0:
            raise ScenarioError(f"pi must be 0 or within [1, 20], got {self.pi}")
        if not 2.0 <= self.tau_s <= 5.0:
            raise ScenarioError(f"tau must lie within [2, 5] s, got {self.tau_s}")
        if self.rho != 0 and not any(abs(self.rho - r) < 1e-12 for r in RHO_CHOICES):
            raise ScenarioError(f"rho must be 0 or one of {RHO_CHOICES}, got {self.rho}")
        if self.ct_ns <= 0:
            raise ScenarioError("cycle time must be positive")
        if not 0.0 < self.init_ratio <= 0.9:
            raise ScenarioError("initial gating ratio must lie in (0, 0.9]")
        if self.duration_s <= 0:
            raise ScenarioError("duration must be positive")
        if not 0 <= self.seed < 2**64:
            raise ScenarioError("seed must fit in 64 bits")
        if self.replications < 1:
            raise ScenarioError("at least one replication is required")

    def to_run_config(self, replication: int) -> RunConfig:
        return RunConfig(
            model="distributed" if self.model == "decentralized" else self.model,
            topology=self.topology,
            reconfig=self.reconfig,
            pi=self.pi,
            tau_s=self.tau_s,
            rho=self.rho,
            ct_ns=self.ct_ns,
            init_ratio=self.init_ratio,
            horizon_ns=int(round(self.duration_s * 1e9)),
            seed=self.seed,
            replication=replication,
        )


def run(scenario: Scenario, replication: int = 0, kernel_cls=None) -> MetricsReport:
    """Run one replication of a scenario and return its report."""
    scenario.validate()
    return run_once(scenario.to_run_config(replication), kernel_cls=kernel_cls)


def run_scenario(scenario: Scenario, kernel_cls=None) -> list[MetricsReport]:
    scenario.validate()
    return [
        run_once(scenario.to_run_config(rep), kernel_cls=kernel_cls)
        for rep in range(scenario.replications)
    ]


def _scenario_cell(scenario: Scenario, value):
    if isinstance(value, bool):
        return "on" if value else "off"
    return value


def sweep_rows(scenarios: list[Scenario], kernel_cls=None) -> list[dict]:
    """Run every (scenario, replication) cell in grid order.

    Returns one dict per cell keyed by CSV_COLUMNS.  All scenarios are
    validated before the first run starts.
    """
    for sc in scenarios:
        sc.validate()
    rows = []
    for sc in scenarios:
        echo = {
            name: _scenario_cell(sc, getattr(sc, name))
            for name in SCENARIO_COLUMNS
            if name != "replication"
        }
        for rep in range(sc.replications):
            report = run_once(sc.to_run_config(rep), kernel_cls=kernel_cls)
            row = dict(echo)
            row["replication"] = rep
            for name in REPORT_COLUMNS:
                row[name] = getattr(report, name)
            rows.append(row)
    return rows


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(row[name]) for name in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path: str) -> list[dict]:
    """Read a sweep CSV back into typed row dicts."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [_type_row(raw) for raw in reader]


_INT_COLUMNS = {
    "ct_ns",
    "seed",
    "replication",
    "st_frames_offered",
    "st_frames_delivered",
    "st_frames_dropped",
    "be_frames_offered",
    "be_frames_delivered",
    "be_frames_dropped",
    "streams_generated",
    "streams_admitted",
    "streams_rejected",
    "streams_completed",
    "admission_defined",
    "signaling_samples",
}
_STR_COLUMNS = {"model", "topology"}
_BOOL_COLUMNS = {"reconfig"}


def _type_row(raw: dict) -> dict:
    row = {}
    for name, text in raw.items():
        if name in _STR_COLUMNS:
            row[name] = text
        elif name in _BOOL_COLUMNS:
            row[name] = text in ("on", "True")
        elif name in _INT_COLUMNS:
            row[name] = int(text)
        else:
            row[name] = float(text)
    return row


def summarize(rows: list[dict], family: str) -> str:
    """Mean-over-replications table for one figure family.

    One panel per (model, topology, reconfig, rho), one line per
    (pi, tau) pair.  The max-delay family appends a '!' flag to any
    centralized admitted-traffic value above the scenario's bound.
    """
    if family not in FIGURE_FAMILIES:
        raise ScenarioError(
            f"unknown figure family {family!r}; choose from {sorted(FIGURE_FAMILIES)}"
        )
    columns = FIGURE_FAMILIES[family]
    if rows:
        missing = [c for c in columns if c not in rows[0]]
        if missing:
            raise ScenarioError(f"rows lack required columns: {missing}")

    header = f"{'pi':>6} {'tau_s':>6} " + " ".join(f"{c:>24}" for c in columns)
    lines = [header]
    panels: dict[tuple, dict[tuple, list[dict]]] = {}
    for row in rows:
        panel = (row["model"], row["topology"], row["reconfig"], row["rho"])
        point = (row["pi"], row["tau_s"])
        panels.setdefault(panel, {}).setdefault(point, []).append(row)

    for panel in sorted(panels, key=lambda p: (p[0], p[1], p[2], p[3])):
        model, topology, reconfig, rho = panel
        lines.append(
            f"# {model} {topology} reconfig={'on' if reconfig else 'off'} rho={rho}"
        )
        for point in sorted(panels[panel]):
            group = panels[panel][point]
            cells = []
            for col in columns:
                mean = sum(r[col] for r in group) / len(group)
                text = f"{mean:.3f}"
                if (
                    family == "max-delay"
                    and col == "st_max_delay_us"
                    and model == "centralized"
                    and mean > MAX_DELAY_BOUND_US[(topology, reconfig)]
                ):
                    text += " !"
                cells.append(f"{text:>24}")
            lines.append(f"{point[0]:>6g} {point[1]:>6g} " + " ".join(cells))
    return "\n".join(lines) + "\n"


def scenario_grid(base: Scenario, **axes) -> list[Scenario]:
    """Cross-product expansion over list-valued scenario fields.

    Axis order is fixed (model, topology, reconfig, pi, tau_s, rho) so
    sweep output order is reproducible no matter how axes are given.
    """
    order = ("model", "topology", "reconfig", "pi", "tau_s", "rho")
    known = {f.name for f in fields(Scenario)}
    for name in axes:
        if name not in order:
            raise ScenarioError(f"cannot sweep over {name!r}" if name in known
                                else f"unknown scenario field {name!r}")
    grid = [base]
    for name in order:
        if name not in axes:
            continue
        values = axes[name]
        grid = [replace(sc, **{name: v}) for sc in grid for v in values]
    return grid
