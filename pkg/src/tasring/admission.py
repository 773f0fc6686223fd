"""Per-port stream admission and ST slot sizing.

The ST slot of a port's gate schedule is resized in 1%-of-cycle steps.
Admission succeeds when the per-cycle demand of all registered streams,
including the candidate, fits inside a slot no larger than 90% of the
cycle.  Releasing a stream shrinks the slot back to the smallest step
multiple that still covers the remaining demand, subject to a per-model
floor: the centralized controller never drops below the initialized
ratio, while distributed switches fall back to 1% (or 0 when no stream
is registered at all).
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    NS_PER_S,
    GateControlEntry,
    GateControlList,
    GATE_BE,
    GATE_CDT,
    GATE_ST,
    PortResourceState,
    StreamSpec,
    recompute_remaining_load,
)


@dataclass(frozen=True)
class SlotPolicy:
    """Bounds governing how a port's ST slot may move."""

    step_ns: int
    max_slot_ns: int
    floor_busy_ns: int
    floor_empty_ns: int
    reconfigurable: bool


def make_policy(model: str, reconfig: bool, ct_ns: int, init_ratio: float) -> SlotPolicy:
    """Slot policy for a configuration model.

    model: "centralized" or "distributed".  With reconfiguration disabled
    the slot is pinned to the initialized ratio in both models.
    """
    assert model in ("centralized", "distributed"), model
    step = ct_ns // 100
    max_slot = ct_ns * 9 // 10
    init_slot = initial_slot_ns(model, reconfig, ct_ns, init_ratio)
    if not reconfig:
        return SlotPolicy(step, max_slot, init_slot, init_slot, False)
    if model == "centralized":
        return SlotPolicy(step, max_slot, init_slot, init_slot, True)
    return SlotPolicy(step, max_slot, step, 0, True)


def initial_slot_ns(model: str, reconfig: bool, ct_ns: int, init_ratio: float) -> int:
    """Slot installed on every port before any stream registers.

    Distributed switches with reconfiguration enabled start with no ST
    allocation at all; every other combination starts at the ratio.
    """
    if model == "distributed" and reconfig:
        return 0
    return round(ct_ns * init_ratio)


@dataclass(frozen=True)
class AdmissionDecision:
    admitted: bool
    reason: str  # fits | grown | no-capacity | at-max-slot | duplicate
    st_slot_ns: int
    remaining_bits: int


def _capacity_bits(slot_ns: int, rate_bps: int) -> int:
    return slot_ns * rate_bps // NS_PER_S


def try_admit(
    port: PortResourceState,
    spec: StreamSpec,
    policy: SlotPolicy,
    commit: bool = True,
) -> AdmissionDecision:
    """Attempt to register a stream on one port.

    With commit=False this is a pure feasibility check (used by the
    hop-by-hop forward pass); the port is never mutated on rejection
    either way.
    """
    if spec.flow_id in port.demands:
        return AdmissionDecision(False, "duplicate", port.st_slot_ns, recompute_remaining_load(port))

    demand = spec.cycle_demand_bits()
    total = port.total_demand_bits() + demand
    slot = port.st_slot_ns

    if _capacity_bits(slot, port.link_rate_bps) >= total:
        reason = "fits"
    elif not policy.reconfigurable:
        return AdmissionDecision(False, "no-capacity", slot, recompute_remaining_load(port))
    else:
        # Grow one step at a time until the new total fits or the cap is hit.
        if slot < policy.floor_busy_ns:
            slot = policy.floor_busy_ns
        while slot < policy.max_slot_ns and _capacity_bits(slot, port.link_rate_bps) < total:
            slot += policy.step_ns
        if slot > policy.max_slot_ns:
            slot = policy.max_slot_ns
        if _capacity_bits(slot, port.link_rate_bps) < total:
            return AdmissionDecision(
                False, "at-max-slot", port.st_slot_ns, recompute_remaining_load(port)
            )
        reason = "grown" if slot != port.st_slot_ns else "fits"

    remaining = _capacity_bits(slot, port.link_rate_bps) - total
    if commit:
        port.demands[spec.flow_id] = demand
        port.st_slot_ns = slot
    return AdmissionDecision(True, reason, slot, remaining)


def release(port: PortResourceState, flow_id: int, policy: SlotPolicy) -> int:
    """Deregister a stream and shrink the slot to the minimal covering size.

    Returns the slot now in force.  Raises KeyError for unknown flows.
    """
    del port.demands[flow_id]
    if not policy.reconfigurable:
        return port.st_slot_ns

    residual = port.total_demand_bits()
    if residual == 0:
        new_slot = policy.floor_empty_ns
    else:
        new_slot = _min_covering_slot(residual, port.link_rate_bps, policy.step_ns)
        if new_slot < policy.floor_busy_ns:
            new_slot = policy.floor_busy_ns
    assert new_slot <= max(port.st_slot_ns, policy.floor_busy_ns), \
        "release must never grow the slot"
    port.st_slot_ns = new_slot
    return new_slot


def _min_covering_slot(bits: int, rate_bps: int, step_ns: int) -> int:
    """Smallest step multiple whose per-cycle capacity covers bits."""
    need_ns = (bits * NS_PER_S + rate_bps - 1) // rate_bps
    steps = (need_ns + step_ns - 1) // step_ns
    return steps * step_ns


def synthesize_gcl(st_slot_ns: int, ct_ns: int) -> GateControlList:
    """Two-entry gate schedule: ST-then-BE, with the control gate always open.

    A zero slot degenerates to a single all-cycle BE entry.
    """
    max_slot = ct_ns * 9 // 10
    if not 0 <= st_slot_ns <= max_slot:
        raise ValueError(
            f"st slot {st_slot_ns} ns outside [0, {max_slot}] ns for ct {ct_ns} ns"
        )
    if st_slot_ns == 0:
        return GateControlList(
            (GateControlEntry(GATE_CDT | GATE_BE, ct_ns),), ct_ns
        )
    return GateControlList(
        (
            GateControlEntry(GATE_CDT | GATE_ST, st_slot_ns),
            GateControlEntry(GATE_CDT | GATE_BE, ct_ns - st_slot_ns),
        ),
        ct_ns,
    )
