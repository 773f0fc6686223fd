"""Fully-distributed configuration: hop-by-hop reservation over in-band
control frames.

Registration walks the stream's path twice.  The forward pass carries a
transmission request from the gateway toward the destination switch,
dry-running admission at every ring egress port and recording a
resource-free pending mark.  The destination turns the message around;
the reverse pass commits resources hop by hop back to the gateway, which
finally answers the source.  A rejection anywhere cancels the walk: mark
erasure travels toward the source, and (after a commit-time race) a
release sweep travels toward the sink so no switch is left holding
resources for a dead stream.

All control frames ride the data links in the dedicated top-priority
control queue, so signaling latency varies with data-plane load.
"""

from __future__ import annotations

from .admission import release, try_admit
from .model import CLS_CDT
from .signaling import (
    OUTCOME_ADMITTED,
    OUTCOME_REJECTED,
    TOK_EXPIRY,
    TOK_SOURCE_BASE,
    TOK_SWITCH_BASE,
)
from .topology import ROLE_CORE_CCW, ROLE_CORE_CW, ROLE_ST_DOWN, ROLE_ST_UP

MSG_REQUEST = 0
MSG_RESERVE = 1
MSG_REJECT_UP = 2    # toward the source: erase pending marks
MSG_REJECT_DOWN = 3  # toward the sink: undo commits after a race
MSG_APPROVE = 4
MSG_REJECT_SRC = 5

PENDING = 0
REGISTERED = 1


class DistributedFabric:
    def __init__(self, sim):
        self.sim = sim
        self.msg_bits = sim.cfg.cdt_bytes * 8
        self.edge_oneway_ns = sim.topo.mgmt_oneway_ns(sim.cfg.cdt_bytes)
        n = sim.topo.n
        self.tables: list[dict[int, int]] = [{} for _ in range(n)]
        self.msgs: list[tuple[int, int, int]] = []  # (kind, flow, hop index)

        kernel, topo = sim.kernel, sim.topo
        self._up_path = [
            kernel.add_path([topo.port(ROLE_ST_UP, s)], sim.EP_CONTROL, TOK_SWITCH_BASE + s)
            for s in range(n)
        ]
        self._down_path = [
            kernel.add_path([topo.port(ROLE_ST_DOWN, s)], sim.EP_CONTROL, TOK_SOURCE_BASE + s)
            for s in range(n)
        ]
        self._hop_path = {}
        for s in range(n):
            self._hop_path[(s, 1)] = kernel.add_path(
                [topo.port(ROLE_CORE_CW, s)], sim.EP_CONTROL, TOK_SWITCH_BASE + (s + 1) % n
            )
            self._hop_path[(s, -1)] = kernel.add_path(
                [topo.port(ROLE_CORE_CCW, s)], sim.EP_CONTROL, TOK_SWITCH_BASE + (s - 1) % n
            )

    # -- sending helpers ------------------------------------------------------

    def _new_msg(self, kind: int, flow: int, k: int) -> int:
        self.msgs.append((kind, flow, k))
        return len(self.msgs) - 1

    def _send_hop(self, kind: int, flow: int, k: int, from_switch: int, to_switch: int) -> None:
        n = self.sim.topo.n
        delta = 1 if (from_switch + 1) % n == to_switch else -1
        path_id = self._hop_path[(from_switch, delta)]
        self.sim.kernel.send_frame(path_id, CLS_CDT, self.msg_bits, self._new_msg(kind, flow, k))
        self.sim.flows[flow].switch_sent_cdt += 1

    def _send_source(self, kind: int, flow: int, gateway: int) -> None:
        path_id = self._down_path[gateway]
        self.sim.kernel.send_frame(path_id, CLS_CDT, self.msg_bits, self._new_msg(kind, flow, 0))
        self.sim.flows[flow].switch_sent_cdt += 1

    def _reject_upstream(self, flow: int, failed_k: int, switch: int) -> None:
        """Propagate a rejection from hop failed_k back toward the source."""
        if failed_k > 0:
            rec = self.sim.flows[flow]
            self._send_hop(MSG_REJECT_UP, flow, failed_k - 1, switch, rec.path_switches[failed_k - 1])
        else:
            self._send_source(MSG_REJECT_SRC, flow, switch)

    def _release_port(self, flow: int, k: int, now: int) -> None:
        sim = self.sim
        pid = sim.flows[flow].path_ports[k]
        state = sim.port_states[pid]
        before = state.st_slot_ns
        after = release(state, flow, sim.policy)
        if after != before:
            sim.kernel.install_gcl(pid, after, now)

    # -- event handlers ---------------------------------------------------------

    def on_request_due(self, flow: int, now: int) -> None:
        rec = self.sim.flows[flow]
        path_id = self._up_path[rec.spec.gateway]
        # The source's own uplink transmission; not a switch-sent frame.
        self.sim.kernel.send_frame(path_id, CLS_CDT, self.msg_bits, self._new_msg(MSG_REQUEST, flow, 0))

    def on_switch_rx(self, switch: int, msg_idx: int, now: int) -> None:
        kind, flow, k = self.msgs[msg_idx]
        sim = self.sim
        rec = sim.flows[flow]
        hops = len(rec.path_switches)

        if kind == MSG_REQUEST:
            if k == hops:
                # Turnaround at the destination: start committing backwards.
                self._send_hop(MSG_RESERVE, flow, hops - 1, switch, rec.path_switches[hops - 1])
                return
            pid = rec.path_ports[k]
            if try_admit(sim.port_states[pid], rec.spec, sim.policy, commit=False).admitted:
                self.tables[switch][flow] = PENDING
                nxt = rec.path_switches[k + 1] if k + 1 < hops else rec.dest_switch
                self._send_hop(MSG_REQUEST, flow, k + 1, switch, nxt)
            else:
                self._reject_upstream(flow, k, switch)

        elif kind == MSG_RESERVE:
            pid = rec.path_ports[k]
            state = sim.port_states[pid]
            before = state.st_slot_ns
            dec = try_admit(state, rec.spec, sim.policy, commit=True)
            if dec.admitted:
                self.tables[switch][flow] = REGISTERED
                rec.commit_order.append(pid)
                if dec.st_slot_ns != before:
                    sim.kernel.install_gcl(pid, dec.st_slot_ns, now)
                if k > 0:
                    self._send_hop(MSG_RESERVE, flow, k - 1, switch, rec.path_switches[k - 1])
                else:
                    rec.release_ns = now + self.edge_oneway_ns + sim.ct_ns + rec.spec.duration_ns
                    sim.kernel.push_control(rec.release_ns, TOK_EXPIRY, flow)
                    self._send_source(MSG_APPROVE, flow, switch)
            else:
                # The slack promised by the forward pass was consumed by a
                # competing stream in the meantime; cancel in both directions.
                self.tables[switch].pop(flow, None)
                self._reject_upstream(flow, k, switch)
                if k + 1 < hops:
                    self._send_hop(MSG_REJECT_DOWN, flow, k + 1, switch, rec.path_switches[k + 1])

        elif kind == MSG_REJECT_UP:
            state = self.tables[switch].pop(flow, None)
            if state == REGISTERED:
                self._release_port(flow, k, now)
            self._reject_upstream(flow, k, switch)

        elif kind == MSG_REJECT_DOWN:
            state = self.tables[switch].pop(flow, None)
            if state == REGISTERED:
                self._release_port(flow, k, now)
            if k + 1 < hops:
                self._send_hop(MSG_REJECT_DOWN, flow, k + 1, switch, rec.path_switches[k + 1])

        else:
            raise AssertionError(f"message kind {kind} cannot arrive at a switch")

    def on_source_rx(self, source: int, msg_idx: int, now: int) -> None:
        kind, flow, _ = self.msgs[msg_idx]
        sim = self.sim
        rec = sim.flows[flow]
        rec.decision_ns = now
        sim.stats.signaling_delays_ns.append(now - rec.spec.start_ns)
        if kind == MSG_APPROVE:
            rec.outcome = OUTCOME_ADMITTED
            sim.stats.admitted += 1
            sim.start_injection(rec, now)
        elif kind == MSG_REJECT_SRC:
            rec.outcome = OUTCOME_REJECTED
            sim.stats.rejected += 1
        else:
            raise AssertionError(f"message kind {kind} cannot arrive at a source")

    def on_expiry(self, flow: int, now: int) -> None:
        # Every switch stored the lifetime at registration and the clock is
        # shared, so the whole path releases at the same instant.
        rec = self.sim.flows[flow]
        for k, switch in enumerate(rec.path_switches):
            self.tables[switch].pop(flow, None)
            self._release_port(flow, k, now)
        self.sim.stats.completed += 1
