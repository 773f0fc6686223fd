"""One simulation run: topology + event kernel + a configuration driver.

The kernel owns all data-plane mechanics; this module builds the port
graph, pre-registers frame paths, feeds the stream workload into the
control heap and dispatches control callbacks to the model-specific
driver (centralized controller or distributed fabric).  After the run it
folds kernel counters and control-plane tallies into a MetricsReport and
verifies frame conservation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .admission import initial_slot_ns, make_policy
from .controller import CentralizedController
from .distributed import DistributedFabric
from .kernel import EP_CONTROL, EP_SINK, Kernel
from .metrics import MetricsReport, build_report
from .model import CLS_CDT, PortResourceState
from .signaling import (
    FlowState,
    RunStats,
    TOK_CNC_RX,
    TOK_DECISION_RX,
    TOK_EXPIRY,
    TOK_PUSH_RX,
    TOK_REQUEST,
    TOK_SOURCE_BASE,
    TOK_SWITCH_BASE,
)
from .topology import CORE_RATE_BPS, ROLE_BE_UP, ROLE_ST_UP, RingTopology
from .traffic import generate_streams, kernel_seed

EDGE_QUEUE_BITS = 1 << 40  # edge links are provisioned drop-free

MODELS = ("centralized", "distributed")
TOPOLOGIES = ("uni", "bi")


class SimulationInvariantError(AssertionError):
    """A structural invariant failed after a run; results are unusable."""


@dataclass(frozen=True)
class RunConfig:
    """Fully-resolved parameters of a single run (times in nanoseconds)."""

    model: str
    topology: str
    reconfig: bool
    pi: float
    tau_s: float
    rho: float
    ct_ns: int = 50_000
    init_ratio: float = 0.2
    horizon_ns: int = 10_000_000_000
    seed: int = 1
    replication: int = 0
    be_frame_bytes: int = 1500
    cdt_bytes: int = 64
    st_queue_bits: int = 512_000
    guard_cycles: int = 10
    trace: bool = False

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.pi < 0 or self.tau_s <= 0 or self.rho < 0:
            raise ValueError("pi and rho must be >= 0 and tau > 0")
        if self.ct_ns <= 0 or self.horizon_ns <= 0:
            raise ValueError("cycle time and horizon must be positive")
        if not 0.0 < self.init_ratio <= 0.9:
            raise ValueError("initial gating ratio must lie in (0, 0.9]")


class Simulation:
    EP_CONTROL = EP_CONTROL

    def __init__(self, cfg: RunConfig, kernel_cls=None):
        cfg.validate()
        self.cfg = cfg
        self.ct_ns = cfg.ct_ns
        self.topo = RingTopology(cfg.topology)
        self.policy = make_policy(cfg.model, cfg.reconfig, cfg.ct_ns, cfg.init_ratio)
        init_slot = initial_slot_ns(cfg.model, cfg.reconfig, cfg.ct_ns, cfg.init_ratio)

        kc = kernel_cls if kernel_cls is not None else Kernel
        self.kernel = kc(
            cfg.horizon_ns, cfg.ct_ns, kernel_seed(cfg.seed, cfg.replication),
            cfg.guard_cycles, cfg.trace,
        )

        controlled = set(self.topo.controlled_ports())
        for p in self.topo.ports:
            pid = self.kernel.add_port(
                p.rate_bps,
                p.prop_ns,
                p.gated,
                cfg.st_queue_bits if p.gated else EDGE_QUEUE_BITS,
                init_slot if p.port_id in controlled else 0,
            )
            assert pid == p.port_id
        self.port_states = {
            pid: PortResourceState(pid, CORE_RATE_BPS, cfg.ct_ns, init_slot)
            for pid in sorted(controlled)
        }

        self._stup = [self.topo.port(ROLE_ST_UP, s) for s in range(self.topo.n)]
        self._st_path = {
            (g, h): self.kernel.add_path(self.topo.st_data_path(g, h), EP_SINK, 0)
            for g in range(self.topo.n)
            for h in range(1, 6)
        }
        if cfg.rho > 0:
            directions = 2 if cfg.topology == "bi" else 1
            per_source_bps = cfg.rho * CORE_RATE_BPS * directions / self.topo.n
            gap_ns = cfg.be_frame_bytes * 8 * 1e9 / per_source_bps
            for s in range(self.topo.n):
                paths = [
                    self.kernel.add_path(self.topo.be_data_path(s, h), EP_SINK, 0)
                    for h in range(1, 6)
                ]
                self.kernel.attach_be_source(
                    self.topo.port(ROLE_BE_UP, s), gap_ns, cfg.be_frame_bytes * 8, paths
                )

        self.streams = generate_streams(
            cfg.seed, cfg.replication, self.topo.n, cfg.pi, cfg.tau_s, cfg.horizon_ns
        )
        self.flows: list[FlowState] = []
        for spec in self.streams:
            direction, _ = self.topo.route(spec.hop_count)
            switches = self.topo.switches_on_path(spec.gateway, spec.hop_count)
            self.flows.append(
                FlowState(
                    spec=spec,
                    direction=direction,
                    path_switches=tuple(switches[:-1]),
                    dest_switch=switches[-1],
                    path_ports=tuple(self.topo.core_path(spec.gateway, spec.hop_count)),
                )
            )
        self.kernel.set_flow_count(len(self.streams))
        for spec in self.streams:
            self.kernel.push_control(spec.start_ns, TOK_REQUEST, spec.flow_id)

        self.stats = RunStats()
        if cfg.model == "centralized":
            self.driver = CentralizedController(self)
        else:
            self.driver = DistributedFabric(self)
        self.kernel.set_control_callback(self._on_control)
        self._ran = False

    # -- control dispatch -------------------------------------------------------

    def _on_control(self, token: int, data: int, now: int) -> None:
        if token == TOK_REQUEST:
            self.driver.on_request_due(data, now)
        elif token == TOK_EXPIRY:
            self.driver.on_expiry(data, now)
        elif token == TOK_CNC_RX:
            self.driver.on_cnc_rx(data, now)
        elif token == TOK_DECISION_RX:
            self.driver.on_decision_rx(data, now)
        elif token == TOK_PUSH_RX:
            self.driver.on_push_rx(data, now)
        elif token >= TOK_SOURCE_BASE:
            self.driver.on_source_rx(token - TOK_SOURCE_BASE, data, now)
        elif token >= TOK_SWITCH_BASE:
            self.driver.on_switch_rx(token - TOK_SWITCH_BASE, data, now)
        else:
            raise AssertionError(f"unroutable control token {token}")

    def start_injection(self, rec: FlowState, now: int) -> None:
        """Begin periodic injection one full cycle after approval arrival."""
        spec = rec.spec
        self.kernel.add_injector(
            self._stup[spec.gateway],
            spec.flow_id,
            self._st_path[(spec.gateway, spec.hop_count)],
            spec.frame_bytes * 8,
            spec.gamma,
            now + self.ct_ns,
            rec.release_ns,
        )

    # -- running ------------------------------------------------------------------

    def run(self) -> MetricsReport:
        assert not self._ran, "a Simulation instance runs exactly once"
        self._ran = True
        self.kernel.run()
        self._check_conservation()
        if self.cfg.model == "centralized":
            signaling_bits = self.stats.controller_cdt_bits
        else:
            signaling_bits = sum(
                self.kernel.port_counters(p.port_id)["tx_bits"][CLS_CDT]
                for p in self.topo.ports
            )
        return build_report(
            self.kernel.counters(),
            self.cfg.horizon_ns,
            len(self.streams),
            self.stats.admitted,
            self.stats.rejected,
            self.stats.completed,
            self.stats.signaling_delays_ns,
            signaling_bits,
        )

    def _check_conservation(self) -> None:
        c = self.kernel.counters()
        resident = self.kernel.resident_frames()
        for klass in range(3):
            balance = c["delivered"][klass] + c["dropped"][klass] + resident[klass]
            if c["created"][klass] != balance:
                raise SimulationInvariantError(
                    f"class {klass}: created {c['created'][klass]} != "
                    f"delivered+dropped+resident {balance}"
                )


def run_once(cfg: RunConfig, kernel_cls=None) -> MetricsReport:
    return Simulation(cfg, kernel_cls=kernel_cls).run()
