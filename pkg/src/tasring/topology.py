"""Ring topology construction and path selection.

Six core switches form a ring of 1 Gb/s links (0.5 us propagation).  Each
switch hosts one periodic-traffic source, one best-effort source and one
sink.  Edge links run at 1 Gb/s on the unidirectional ring and 2 Gb/s on
the bidirectional ring.  Only switch-to-switch egress ports are subject
to admission control; edge links are provisioned to be drop-free.

The sink edge is modeled as independent per-class channels so delivery
measurement is not distorted by cross-class blocking on the last,
uncontrolled link.
"""

from __future__ import annotations

from dataclasses import dataclass

CORE_RATE_BPS = 1_000_000_000
PROP_NS = 500

# Port roles.  core-ccw ports carry data only on the bidirectional ring;
# on the unidirectional ring they exist as reverse control channels.
ROLE_CORE_CW = "core-cw"
ROLE_CORE_CCW = "core-ccw"
ROLE_ST_UP = "st-up"        # traffic source -> gateway switch
ROLE_ST_DOWN = "st-down"    # gateway switch -> traffic source (responses)
ROLE_BE_UP = "be-up"        # best-effort source -> switch
ROLE_SINK_ST = "sink-st"    # switch -> sink, periodic-traffic channel
ROLE_SINK_BE = "sink-be"    # switch -> sink, best-effort channel


@dataclass(frozen=True)
class PortDef:
    port_id: int
    role: str
    switch: int
    rate_bps: int
    prop_ns: int
    gated: bool  # True: runs the cyclic gate schedule; False: plain priority FIFO


class RingTopology:
    """Port table and routing rules for one ring configuration."""

    def __init__(self, kind: str, n_switches: int = 6):
        assert kind in ("uni", "bi"), kind
        assert n_switches >= 3, "ring needs at least three switches"
        self.kind = kind
        self.n = n_switches
        self.edge_rate_bps = CORE_RATE_BPS if kind == "uni" else 2 * CORE_RATE_BPS

        self.ports: list[PortDef] = []
        self._by_role: dict[tuple[str, int], int] = {}
        for s in range(n_switches):
            self._add(ROLE_CORE_CW, s, CORE_RATE_BPS, gated=True)
            # Reverse-direction ring channel: gated data port on the bi ring,
            # control-only FIFO on the uni ring.
            self._add(ROLE_CORE_CCW, s, CORE_RATE_BPS, gated=(kind == "bi"))
            self._add(ROLE_ST_UP, s, self.edge_rate_bps, gated=False)
            self._add(ROLE_ST_DOWN, s, self.edge_rate_bps, gated=False)
            self._add(ROLE_BE_UP, s, self.edge_rate_bps, gated=False)
            self._add(ROLE_SINK_ST, s, self.edge_rate_bps, gated=False)
            self._add(ROLE_SINK_BE, s, self.edge_rate_bps, gated=False)

    def _add(self, role: str, switch: int, rate: int, gated: bool) -> None:
        pid = len(self.ports)
        self.ports.append(PortDef(pid, role, switch, rate, PROP_NS, gated))
        self._by_role[(role, switch)] = pid

    def port(self, role: str, switch: int) -> int:
        return self._by_role[(role, switch % self.n)]

    def controlled_ports(self) -> list[int]:
        """Ports subject to admission control (ring egress ports)."""
        out = [self.port(ROLE_CORE_CW, s) for s in range(self.n)]
        if self.kind == "bi":
            out += [self.port(ROLE_CORE_CCW, s) for s in range(self.n)]
        return out

    # -- routing ---------------------------------------------------------

    def route(self, hop_count: int) -> tuple[int, int]:
        """(direction, effective hops) for a destination hop_count away cw.

        direction +1 is clockwise.  The bidirectional ring takes the shorter
        way round; the half-way tie goes clockwise, which with a uniform
        hop draw yields the 60/40 split between the two ring directions.
        """
        assert 1 <= hop_count < self.n, hop_count
        if self.kind == "uni":
            return 1, hop_count
        ccw = self.n - hop_count
        if hop_count <= ccw:
            return 1, hop_count
        return -1, ccw

    def switches_on_path(self, gateway: int, hop_count: int) -> list[int]:
        """Switch ids visited, gateway first, destination last."""
        direction, hops = self.route(hop_count)
        return [(gateway + direction * i) % self.n for i in range(hops + 1)]

    def core_path(self, gateway: int, hop_count: int) -> list[int]:
        """Ring egress ports a stream occupies, in traversal order."""
        direction, hops = self.route(hop_count)
        role = ROLE_CORE_CW if direction == 1 else ROLE_CORE_CCW
        return [self.port(role, gateway + direction * i) for i in range(hops)]

    def reverse_hop_port(self, from_switch: int, to_switch: int) -> int:
        """Ring port carrying a control frame one hop against a path."""
        if (from_switch - 1) % self.n == to_switch % self.n:
            return self.port(ROLE_CORE_CCW, from_switch)
        if (from_switch + 1) % self.n == to_switch % self.n:
            return self.port(ROLE_CORE_CW, from_switch)
        raise ValueError(f"switches {from_switch} and {to_switch} are not adjacent")

    def st_data_path(self, gateway: int, hop_count: int) -> list[int]:
        dest = self.switches_on_path(gateway, hop_count)[-1]
        return (
            [self.port(ROLE_ST_UP, gateway)]
            + self.core_path(gateway, hop_count)
            + [self.port(ROLE_SINK_ST, dest)]
        )

    def be_data_path(self, source: int, hop_count: int) -> list[int]:
        dest = self.switches_on_path(source, hop_count)[-1]
        return (
            [self.port(ROLE_BE_UP, source)]
            + self.core_path(source, hop_count)
            + [self.port(ROLE_SINK_BE, dest)]
        )

    # -- out-of-band management plane -------------------------------------

    def mgmt_oneway_ns(self, msg_bytes: int) -> int:
        """Fixed one-way delay between an endpoint and the controller.

        Serialization at the edge rate plus one propagation hop; constant
        for a given message size, never queued.
        """
        return msg_bytes * 8 * 1_000_000_000 // self.edge_rate_bps + PROP_NS
