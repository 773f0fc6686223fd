"""Centralized configuration: one controller owns every ring port.

Sources talk to the controller over a lossless out-of-band management
channel with a fixed one-way delay, so registration never touches the
data plane.  The controller admits a stream on every port of its path
atomically (all-or-nothing against mirror state), pushes changed gate
schedules to the affected switches, and answers the source.  Stream
expiry is handled by a controller-side timer since the lifetime is part
of the registration.
"""

from __future__ import annotations

from .admission import release, try_admit
from .signaling import (
    OUTCOME_ADMITTED,
    OUTCOME_REJECTED,
    TOK_CNC_RX,
    TOK_DECISION_RX,
    TOK_EXPIRY,
    TOK_PUSH_RX,
)


class CentralizedController:
    def __init__(self, sim):
        self.sim = sim
        self.oneway_ns = sim.topo.mgmt_oneway_ns(sim.cfg.cdt_bytes)
        self.msg_bits = sim.cfg.cdt_bytes * 8
        self.registered: dict[int, tuple[int, ...]] = {}  # flow -> path ports
        self.pushes: list[tuple[int, int]] = []  # (port, slot_ns)

    # -- event handlers -----------------------------------------------------

    def on_request_due(self, flow: int, now: int) -> None:
        self.sim.kernel.push_control(now + self.oneway_ns, TOK_CNC_RX, flow)

    def on_cnc_rx(self, flow: int, now: int) -> None:
        sim = self.sim
        sim.stats.controller_cdt_bits += self.msg_bits
        rec = sim.flows[flow]
        spec = rec.spec

        trial = {pid: sim.port_states[pid].clone() for pid in rec.path_ports}
        admitted = True
        for pid in rec.path_ports:
            if not try_admit(trial[pid], spec, sim.policy, commit=True).admitted:
                admitted = False
                break

        if admitted:
            for pid in rec.path_ports:
                new_state = trial[pid]
                if new_state.st_slot_ns != sim.port_states[pid].st_slot_ns:
                    self._push_gcl(pid, new_state.st_slot_ns, now)
                sim.port_states[pid] = new_state
            self.registered[flow] = rec.path_ports
            rec.outcome = OUTCOME_ADMITTED
            arrival = now + self.oneway_ns
            rec.release_ns = arrival + sim.ct_ns + spec.duration_ns
            sim.kernel.push_control(rec.release_ns, TOK_EXPIRY, flow)
        else:
            rec.outcome = OUTCOME_REJECTED
        sim.stats.controller_cdt_bits += self.msg_bits
        sim.kernel.push_control(now + self.oneway_ns, TOK_DECISION_RX, flow)

    def on_decision_rx(self, flow: int, now: int) -> None:
        sim = self.sim
        rec = sim.flows[flow]
        rec.decision_ns = now
        sim.stats.signaling_delays_ns.append(now - rec.spec.start_ns)
        if rec.outcome == OUTCOME_ADMITTED:
            sim.stats.admitted += 1
            sim.start_injection(rec, now)
        else:
            sim.stats.rejected += 1

    def on_push_rx(self, push_idx: int, now: int) -> None:
        pid, slot_ns = self.pushes[push_idx]
        self.sim.kernel.install_gcl(pid, slot_ns, now)

    def on_expiry(self, flow: int, now: int) -> None:
        sim = self.sim
        path = self.registered.pop(flow)
        for pid in path:
            state = sim.port_states[pid]
            before = state.st_slot_ns
            after = release(state, flow, sim.policy)
            if after != before:
                self._push_gcl(pid, after, now)
        sim.stats.completed += 1

    # -- helpers --------------------------------------------------------------

    def _push_gcl(self, pid: int, slot_ns: int, now: int) -> None:
        idx = len(self.pushes)
        self.pushes.append((pid, slot_ns))
        self.sim.kernel.push_control(now + self.oneway_ns, TOK_PUSH_RX, idx)
