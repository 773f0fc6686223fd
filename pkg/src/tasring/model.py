"""Core data types for gate-scheduled Ethernet ports and periodic streams.

All times are integer nanoseconds so that gate arithmetic, queue occupancy
and reservation bookkeeping stay exact; rates are bits per second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

NS_PER_S = 1_000_000_000

# Traffic classes in strict priority order (lower value wins selection).
CLS_CDT = 0
CLS_ST = 1
CLS_BE = 2
CLASS_NAMES = ("cdt", "st", "be")

# Gate bitmap bits, one per class.
GATE_CDT = 1 << CLS_CDT
GATE_ST = 1 << CLS_ST
GATE_BE = 1 << CLS_BE


class CdtKind(IntEnum):
    """Signaling message kinds carried by the control traffic class."""

    TRANSMISSION_REQUEST = 0
    PENDING_RESERVATION = 1
    APPROVAL_GRANTED = 2
    REJECTION = 3


@dataclass(frozen=True)
class StreamSpec:
    """A periodic stream request: gamma frames of frame_bytes per cycle."""

    flow_id: int
    gateway: int
    hop_count: int
    start_ns: int
    duration_ns: int
    gamma: int = 1
    frame_bytes: int = 64

    @property
    def finish_ns(self) -> int:
        return self.start_ns + self.duration_ns

    def cycle_demand_bits(self) -> int:
        """Bits this stream places on each path port per cycle."""
        return self.gamma * self.frame_bytes * 8


def stream_rate_bps(spec: StreamSpec, ct_ns: int) -> float:
    """Average data rate of a stream over one cycle.

    gamma * frame_bytes * 8 bits every ct_ns nanoseconds.
    """
    assert ct_ns > 0, "cycle time must be positive"
    return spec.cycle_demand_bits() * NS_PER_S / ct_ns


def port_bandwidth_requirement_bps(spec: StreamSpec, st_slot_ns: int) -> float:
    """Bandwidth a stream consumes inside an ST slot of the given length.

    The per-cycle demand must be served within the slot, so the effective
    rate seen by the slot is demand / slot_time.
    """
    assert st_slot_ns > 0, "slot must be positive for a bandwidth requirement"
    return spec.cycle_demand_bits() * NS_PER_S / st_slot_ns


@dataclass(frozen=True)
class GateControlEntry:
    """One gate-control entry: which class gates are open, and for how long."""

    gate_mask: int
    duration_ns: int

    def is_open(self, klass: int) -> bool:
        return bool(self.gate_mask & (1 << klass))


@dataclass(frozen=True)
class GateControlList:
    """A cyclic gate schedule; entry durations must tile the cycle exactly."""

    entries: tuple[GateControlEntry, ...]
    cycle_ns: int

    def __post_init__(self) -> None:
        if self.cycle_ns <= 0:
            raise ValueError("cycle time must be positive")
        total = sum(e.duration_ns for e in self.entries)
        if total != self.cycle_ns:
            raise ValueError(
                f"gate entries span {total} ns but the cycle is {self.cycle_ns} ns"
            )
        if any(e.duration_ns <= 0 for e in self.entries):
            raise ValueError("gate entries must have positive duration")


def gate_state_at(gcl: GateControlList, t_ns: int) -> int:
    """Gate bitmap in force at absolute time t_ns (entries are half-open)."""
    offset = t_ns % gcl.cycle_ns
    for entry in gcl.entries:
        if offset < entry.duration_ns:
            return entry.gate_mask
        offset -= entry.duration_ns
    raise AssertionError("unreachable: entries tile the cycle")


@dataclass
class PortResourceState:
    """Reservation ledger for one switch-to-switch egress port.

    This is the admission-control view of a port: the ST slot length and the
    per-flow bits committed to each cycle.  The data plane mirrors the slot
    via its installed gate schedule.
    """

    port_id: int
    link_rate_bps: int
    ct_ns: int
    st_slot_ns: int
    demands: dict[int, int] = field(default_factory=dict)

    def slot_capacity_bits(self) -> int:
        """Bits transmittable inside the ST slot of one cycle."""
        return self.st_slot_ns * self.link_rate_bps // NS_PER_S

    def total_demand_bits(self) -> int:
        return sum(self.demands.values())

    def clone(self) -> PortResourceState:
        return PortResourceState(
            port_id=self.port_id,
            link_rate_bps=self.link_rate_bps,
            ct_ns=self.ct_ns,
            st_slot_ns=self.st_slot_ns,
            demands=dict(self.demands),
        )


def recompute_remaining_load(port: PortResourceState) -> int:
    """Slack of the ST slot in bits per cycle; negative means oversubscribed."""
    return port.slot_capacity_bits() - port.total_demand_bits()


@dataclass(frozen=True)
class CdtMessage:
    """A 64-byte control frame used by hop-by-hop stream registration."""

    kind: CdtKind
    flow_id: int
    size_bytes: int = 64

    def size_bits(self) -> int:
        return self.size_bytes * 8
