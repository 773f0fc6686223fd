"""Pure-Python data-plane kernel: ports, gates, queues and the event loop.

The kernel moves frames through a fixed port graph under cyclic gate
schedules.  Everything control-plane (admission, registration protocol,
schedule pushes) lives outside and talks to the kernel through timed
control callbacks, so this module stays a mechanical packet mover.

Determinism contract: all state advances in (time, sequence) order where
the sequence number is assigned at event insertion.  Given equal inputs
the compiled kernel replays the exact same order; equivalence tests pin
the two implementations against each other.

Port handler order within one activation is fixed: apply due schedule
changes, finish an in-flight transmission, accept due arrivals, pump
local sources, then start the next transmission.
"""

from __future__ import annotations

import math
from collections import deque
from heapq import heappop, heappush

from ..model import CLS_BE, CLS_CDT, CLS_ST, NS_PER_S

INF = 1 << 62

EP_SINK = 0
EP_CONTROL = 1

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 generator; returns (new_state, output)."""
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Frame:
    __slots__ = (
        "klass", "flow", "size_bits", "created_ns", "path_id", "cursor",
        "msg", "crossed", "eseq",
    )

    def __init__(self, klass, flow, size_bits, created_ns, path_id, msg=-1):
        self.klass = klass
        self.flow = flow
        self.size_bits = size_bits
        self.created_ns = created_ns
        self.path_id = path_id
        self.cursor = 0
        self.msg = msg
        # Set once the frame has been forwarded by a gate-scheduled port.
        self.crossed = False
        # Per-port arrival stamp, used to keep service in arrival order
        # when the ingress and transit lanes are both eligible.
        self.eseq = 0


class _Link:
    """In-flight frames between two ports; FIFO because rate and
    propagation are constant per link."""

    __slots__ = ("queue",)

    def __init__(self):
        self.queue = deque()  # (arrival_ns, frame)


class _StreamEntry:
    __slots__ = ("phase_ns", "flow", "path_id", "size_bits", "gamma", "start_ns", "end_ns")

    def __init__(self, phase_ns, flow, path_id, size_bits, gamma, start_ns, end_ns):
        self.phase_ns = phase_ns
        self.flow = flow
        self.path_id = path_id
        self.size_bits = size_bits
        self.gamma = gamma
        self.start_ns = start_ns
        self.end_ns = end_ns


class _Port:
    __slots__ = (
        "pid", "rate_bps", "prop_ns", "gated", "capacity_bits",
        "slot_ns", "installs", "floor_slot", "floor_until",
        "queues", "tqueue", "queue_bits", "enq_ctr",
        "feeders", "busy_frame", "busy_until",
        "src_entries", "src_cursor", "src_base", "src_next",
        "be_state", "be_gap_ns", "be_size_bits", "be_paths", "be_next",
        "sched_time", "sched_seq",
        "enq", "tx_frames", "tx_bits", "drops",
    )

    def __init__(self, pid, rate_bps, prop_ns, gated, capacity_bits, slot_ns):
        self.pid = pid
        self.rate_bps = rate_bps
        self.prop_ns = prop_ns
        self.gated = gated
        self.capacity_bits = capacity_bits
        self.slot_ns = slot_ns
        self.installs = []  # sorted (activate_ns, seq, slot_ns)
        self.floor_slot = 0
        self.floor_until = 0
        self.queues = (deque(), deque(), deque())
        # Express frames already inside the ring wait here at gated ports;
        # queue_bits keeps one combined per-class total across both lanes.
        self.tqueue = deque()
        self.queue_bits = [0, 0, 0]
        self.enq_ctr = 0
        self.feeders = []  # _Link objects delivering into this port
        self.busy_frame = None
        self.busy_until = 0
        self.src_entries = None  # list[_StreamEntry] on periodic-source edges
        self.src_cursor = 0
        self.src_base = 0
        self.src_next = INF
        self.be_state = None
        self.be_gap_ns = 0.0
        self.be_size_bits = 0
        self.be_paths = None
        self.be_next = INF
        self.sched_time = INF
        self.sched_seq = -1
        self.enq = [0, 0, 0]
        self.tx_frames = [0, 0, 0]
        self.tx_bits = [0, 0, 0]
        self.drops = [0, 0, 0]


class PureKernel:
    """Reference event kernel; see module docstring."""

    backend = "pure"

    def __init__(self, horizon_ns: int, ct_ns: int, seed: int,
                 guard_cycles: int = 10, trace: bool = False):
        self.horizon_ns = horizon_ns
        self.ct_ns = ct_ns
        self.seed = seed & _MASK64
        self.guard_ns = guard_cycles * ct_ns
        self.trace_enabled = trace
        self.trace_hash = 0xCBF29CE484222325
        self.clock_ns = 0
        self._seq = 0
        self._entity_heap = []  # (time, seq, port_idx)
        self._control_heap = []  # (time, seq, token, data)
        self._callback = None
        self.ports: list[_Port] = []
        self._links: list[_Link] = []
        self._link_index: dict[tuple[int, int], int] = {}
        self._paths: list[tuple[tuple[int, ...], int, int]] = []
        self._path_links: list[list[int]] = []
        # Network counters per class.
        self.created = [0, 0, 0]
        self.delivered = [0, 0, 0]
        self.dropped = [0, 0, 0]
        self.delivered_bits = [0, 0, 0]
        self.delay_sum_ns = [0, 0, 0]
        self.delay_max_ns = [0, 0, 0]
        self.flow_created: list[int] = []
        self.flow_delivered: list[int] = []

    # -- construction ------------------------------------------------------

    def add_port(self, rate_bps, prop_ns, gated, capacity_bits, slot_ns) -> int:
        pid = len(self.ports)
        self.ports.append(_Port(pid, rate_bps, prop_ns, gated, capacity_bits, slot_ns))
        return pid

    def add_path(self, ports, ep_kind, ep_tag) -> int:
        ports = tuple(ports)
        assert ports, "a path needs at least one port"
        links = []
        for a, b in zip(ports, ports[1:]):
            key = (a, b)
            li = self._link_index.get(key)
            if li is None:
                li = len(self._links)
                self._links.append(_Link())
                self._link_index[key] = li
                self.ports[b].feeders.append(self._links[li])
            links.append(li)
        path_id = len(self._paths)
        self._paths.append((ports, ep_kind, ep_tag))
        self._path_links.append(links)
        return path_id

    def set_flow_count(self, n: int) -> None:
        self.flow_created = [0] * n
        self.flow_delivered = [0] * n

    def set_control_callback(self, fn) -> None:
        self._callback = fn

    def attach_be_source(self, pid: int, mean_gap_ns: float, size_bits: int,
                         path_ids) -> None:
        port = self.ports[pid]
        port.be_state = (self.seed ^ ((0x5851F42D4C957F2D * (pid + 1)) & _MASK64)) & _MASK64
        port.be_gap_ns = mean_gap_ns
        port.be_size_bits = size_bits
        port.be_paths = list(path_ids)
        port.be_state, z = _splitmix64(port.be_state)
        port.be_next = self.clock_ns + self._exp_ns(z, mean_gap_ns)
        self._reschedule(port)

    # -- control-plane entry points ---------------------------------------

    def push_control(self, time_ns: int, token: int, data: int) -> None:
        self._seq += 1
        heappush(self._control_heap, (time_ns, self._seq, token, data))

    def add_injector(self, pid: int, flow: int, path_id: int, size_bits: int,
                     gamma: int, start_ns: int, end_ns: int) -> None:
        """Register a periodic source firing every cycle at a fixed phase."""
        port = self.ports[pid]
        self._ingest(port, self.clock_ns)
        if port.src_entries is None:
            port.src_entries = []
            port.src_cursor = 0
            port.src_base = self.clock_ns - self.clock_ns % self.ct_ns
        phase = start_ns % self.ct_ns
        entry = _StreamEntry(phase, flow, path_id, size_bits, gamma, start_ns, end_ns)
        lo, hi = 0, len(port.src_entries)
        while lo < hi:
            mid = (lo + hi) // 2
            e = port.src_entries[mid]
            if (e.phase_ns, e.flow) < (phase, flow):
                lo = mid + 1
            else:
                hi = mid
        port.src_entries.insert(lo, entry)
        if lo < port.src_cursor:
            port.src_cursor += 1
        self._advance_src(port, self.clock_ns)
        self._reschedule(port)

    def send_frame(self, path_id: int, klass: int, size_bits: int, msg: int) -> None:
        """Inject one frame at the head port of a path, at the current time."""
        port = self.ports[self._paths[path_id][0][0]]
        self._ingest(port, self.clock_ns)
        frame = Frame(klass, -1, size_bits, self.clock_ns, path_id, msg)
        self.created[klass] += 1
        self._enqueue(port, frame, self.clock_ns)
        self._reschedule(port)

    def install_gcl(self, pid: int, slot_ns: int, effective_ns: int) -> None:
        """Queue a slot change activating at the next cycle boundary."""
        port = self.ports[pid]
        boundary = -(-effective_ns // self.ct_ns) * self.ct_ns
        self._seq += 1
        rec = (boundary, self._seq, slot_ns)
        lo, hi = 0, len(port.installs)
        while lo < hi:
            mid = (lo + hi) // 2
            if port.installs[mid] < rec:
                lo = mid + 1
            else:
                hi = mid
        port.installs.insert(lo, rec)
        self._reschedule(port)

    # -- introspection ------------------------------------------------------

    def port_slot_ns(self, pid: int) -> int:
        """Slot in force right now, including any shrink-drain floor."""
        port = self.ports[pid]
        self._apply_installs(port, self.clock_ns)
        return self._effective_slot(port, self.clock_ns)

    def port_queue_bits(self, pid: int, klass: int) -> int:
        return self.ports[pid].queue_bits[klass]

    def port_counters(self, pid: int) -> dict:
        port = self.ports[pid]
        return {
            "enq": list(port.enq),
            "tx_frames": list(port.tx_frames),
            "tx_bits": list(port.tx_bits),
            "drops": list(port.drops),
        }

    def resident_frames(self) -> list[int]:
        """Frames still queued, in flight on a link, or in transmission."""
        out = [0, 0, 0]
        for port in self.ports:
            for klass in (CLS_CDT, CLS_ST, CLS_BE):
                out[klass] += len(port.queues[klass])
            out[CLS_ST] += len(port.tqueue)
            if port.busy_frame is not None:
                out[port.busy_frame.klass] += 1
        for link in self._links:
            for _, frame in link.queue:
                out[frame.klass] += 1
        return out

    def counters(self) -> dict:
        return {
            "created": list(self.created),
            "delivered": list(self.delivered),
            "dropped": list(self.dropped),
            "delivered_bits": list(self.delivered_bits),
            "delay_sum_ns": list(self.delay_sum_ns),
            "delay_max_ns": list(self.delay_max_ns),
        }

    # -- mechanics ----------------------------------------------------------

    @staticmethod
    def _exp_ns(z: int, mean_ns: float) -> int:
        u = ((z >> 11) + 1) * (2.0 ** -53)
        return int(-math.log(u) * mean_ns)

    def _effective_slot(self, port: _Port, now: int) -> int:
        if now < port.floor_until and port.floor_slot > port.slot_ns:
            return port.floor_slot
        return port.slot_ns

    def _enqueue(self, port: _Port, frame: Frame, now: int) -> None:
        klass = frame.klass
        if port.queue_bits[klass] + frame.size_bits > port.capacity_bits:
            port.drops[klass] += 1
            self.dropped[klass] += 1
            return
        frame.eseq = port.enq_ctr
        port.enq_ctr += 1
        if klass == CLS_ST and port.gated and frame.crossed:
            port.tqueue.append(frame)
        else:
            port.queues[klass].append(frame)
        port.queue_bits[klass] += frame.size_bits
        port.enq[klass] += 1

    def _apply_installs(self, port: _Port, now: int) -> None:
        while port.installs and port.installs[0][0] <= now:
            boundary, _, slot = port.installs.pop(0)
            if slot < port.slot_ns:
                # Shrinks keep the old window alive for a drain period so
                # frames already in flight cannot displace remaining traffic.
                if port.slot_ns > port.floor_slot or boundary + self.guard_ns > port.floor_until:
                    port.floor_slot = max(port.floor_slot, port.slot_ns)
                    port.floor_until = max(port.floor_until, boundary + self.guard_ns)
            port.slot_ns = slot

    def _select(self, port: _Port, now: int) -> Frame | None:
        """Best frame that may start transmitting now.

        Gated ports apply the window only to frames entering the ring
        here; frames already forwarded by an upstream gated port wait in
        the transit lane, which rides on class priority alone, so a
        multi-hop path never pays the cycle alignment wait twice.  When
        both lanes could start, the earlier arrival goes first.
        """
        qb = port.queue_bits
        if not port.gated:
            for klass in (CLS_CDT, CLS_ST, CLS_BE):
                if qb[klass]:
                    return port.queues[klass].popleft()
            return None
        if qb[CLS_CDT]:
            return port.queues[CLS_CDT].popleft()
        pos = now % self.ct_ns
        slot = self._effective_slot(port, now)
        queue = port.queues[CLS_ST]
        tqueue = port.tqueue
        if queue and pos < slot:
            frame = queue[0]
            if pos + frame.size_bits * NS_PER_S // port.rate_bps <= slot:
                if not tqueue or frame.eseq < tqueue[0].eseq:
                    return queue.popleft()
        if tqueue:
            return tqueue.popleft()
        if qb[CLS_BE] and pos >= slot:
            frame = port.queues[CLS_BE][0]
            if pos + frame.size_bits * NS_PER_S // port.rate_bps <= self.ct_ns:
                return port.queues[CLS_BE].popleft()
        return None

    def _wake_time(self, port: _Port, now: int) -> int:
        """Earliest instant (possibly now) at which a queued frame might start."""
        ct = self.ct_ns
        if not port.gated:
            return now
        if port.queue_bits[CLS_CDT]:
            return now
        best = INF
        if port.installs:
            best = port.installs[0][0]
        if now < port.floor_until:
            best = min(best, port.floor_until)
        pos = now % ct
        base = now - pos
        slot = self._effective_slot(port, now)
        if port.tqueue:
            return now
        if port.queues[CLS_ST]:
            frame = port.queues[CLS_ST][0]
            tx = frame.size_bits * NS_PER_S // port.rate_bps
            if pos + tx <= slot:
                return now
            if tx <= slot:
                best = min(best, base + ct)
        if port.queue_bits[CLS_BE]:
            frame = port.queues[CLS_BE][0]
            tx = frame.size_bits * NS_PER_S // port.rate_bps
            if pos >= slot and pos + tx <= ct:
                return now
            if slot + tx <= ct:
                start = base + slot if pos < slot else base + ct + slot
                best = min(best, start)
        return best

    def _advance_src(self, port: _Port, now: int) -> None:
        """Recompute the next periodic fire time, retiring finished streams."""
        entries = port.src_entries
        if not entries:
            port.src_next = INF
            return
        ct = self.ct_ns
        while True:
            if port.src_cursor >= len(entries):
                port.src_cursor = 0
                port.src_base += ct
                if not entries:
                    port.src_next = INF
                    return
                continue
            entry = entries[port.src_cursor]
            t_fire = port.src_base + entry.phase_ns
            if t_fire >= entry.end_ns:
                entries.pop(port.src_cursor)
                if not entries:
                    port.src_next = INF
                    return
                continue
            if t_fire < entry.start_ns:
                port.src_cursor += 1
                continue
            port.src_next = t_fire
            return

    def _fire_src(self, port: _Port) -> None:
        """Emit one due injector fire (all of its frames share the instant)."""
        entry = port.src_entries[port.src_cursor]
        t = port.src_next
        for _ in range(entry.gamma):
            frame = Frame(CLS_ST, entry.flow, entry.size_bits, t, entry.path_id)
            self.created[CLS_ST] += 1
            self.flow_created[entry.flow] += 1
            self._enqueue(port, frame, t)
        port.src_cursor += 1
        self._advance_src(port, t)

    def _fire_be(self, port: _Port) -> None:
        """Emit one due background frame and draw the next gap."""
        t = port.be_next
        port.be_state, z = _splitmix64(port.be_state)
        idx = ((z >> 11) * len(port.be_paths)) >> 53
        frame = Frame(CLS_BE, -1, port.be_size_bits, t, port.be_paths[idx])
        self.created[CLS_BE] += 1
        self._enqueue(port, frame, t)
        port.be_state, z = _splitmix64(port.be_state)
        port.be_next = t + self._exp_ns(z, port.be_gap_ns)

    def _ingest(self, port: _Port, now: int) -> None:
        """Move every due frame into the port's queues, in arrival order.

        Feeders, the periodic injector, and the background source merge
        into one time-ordered stream; ties go to the lowest feeder index,
        then the injector, then the background source, so replay order is
        well defined.  Arrivals at a transmitting port wait here for its
        completion wake, which cannot change what the port sends (nothing
        leaves a queue while the port is busy).  Anything that enqueues
        out of band or edits the injector table must call this first.
        """
        while True:
            best = None
            best_t = INF
            for link in port.feeders:
                if link.queue:
                    t = link.queue[0][0]
                    if t <= now and t < best_t:
                        best_t = t
                        best = link
            if best is not None and port.src_next >= best_t and port.be_next >= best_t:
                _, frame = best.queue.popleft()
                self._enqueue(port, frame, now)
            elif port.src_next <= now and port.src_next <= min(best_t, port.be_next):
                self._fire_src(port)
            elif port.be_next <= now and port.be_next < min(best_t, port.src_next):
                self._fire_be(port)
            else:
                return

    def _complete(self, port: _Port, now: int) -> None:
        frame = port.busy_frame
        port.busy_frame = None
        done = port.busy_until
        klass = frame.klass
        port.tx_frames[klass] += 1
        port.tx_bits[klass] += frame.size_bits
        if klass == CLS_ST and port.gated:
            frame.crossed = True
        ports, ep_kind, ep_tag = self._paths[frame.path_id]
        if frame.cursor + 1 < len(ports):
            link = self._links[self._path_links[frame.path_id][frame.cursor]]
            frame.cursor += 1
            link.queue.append((done + port.prop_ns, frame))
            nxt = self.ports[ports[frame.cursor]]
            self._reschedule(nxt)
        else:
            arrival = done + port.prop_ns
            self.delivered[klass] += 1
            self.delivered_bits[klass] += frame.size_bits
            if ep_kind == EP_SINK:
                delay = arrival - frame.created_ns
                self.delay_sum_ns[klass] += delay
                if delay > self.delay_max_ns[klass]:
                    self.delay_max_ns[klass] = delay
                if frame.flow >= 0:
                    self.flow_delivered[frame.flow] += 1
            else:
                self.push_control(arrival, ep_tag, frame.msg)

    def _handle(self, port: _Port, now: int) -> None:
        self._apply_installs(port, now)
        if port.busy_frame is not None and port.busy_until <= now:
            self._complete(port, now)
        self._ingest(port, now)
        if port.busy_frame is None:
            frame = self._select(port, now)
            if frame is not None:
                port.queue_bits[frame.klass] -= frame.size_bits
                port.busy_frame = frame
                port.busy_until = now + frame.size_bits * NS_PER_S // port.rate_bps

    def _next_action(self, port: _Port) -> int:
        # A transmitting port sleeps until its frame ends: arrivals due in
        # the meantime are ingested by the completion wake in arrival
        # order, which cannot change anything it sends.
        if port.busy_frame is not None:
            return port.busy_until
        t = INF
        if port.queue_bits[0] or port.queue_bits[1] or port.queue_bits[2]:
            t = self._wake_time(port, self.clock_ns)
        elif port.installs:
            t = port.installs[0][0]
        for link in port.feeders:
            if link.queue and link.queue[0][0] < t:
                t = link.queue[0][0]
        if port.src_next < t:
            t = port.src_next
        if port.be_next < t:
            t = port.be_next
        return t

    def _reschedule(self, port: _Port) -> None:
        t = self._next_action(port)
        if t == port.sched_time:
            return
        port.sched_time = t
        if t >= INF:
            port.sched_seq = -1
            return
        self._seq += 1
        port.sched_seq = self._seq
        heappush(self._entity_heap, (t, self._seq, port.pid))

    def _mix_trace(self, a: int, b: int, c: int) -> None:
        h = self.trace_hash
        for x in (a, b, c):
            h = ((h ^ (x & _MASK64)) * 0x100000001B3) & _MASK64
        self.trace_hash = h

    # -- main loop -----------------------------------------------------------

    def run(self) -> None:
        eh = self._entity_heap
        ch = self._control_heap
        horizon = self.horizon_ns
        while True:
            et = eh[0] if eh else None
            ct_ = ch[0] if ch else None
            if et is None and ct_ is None:
                break
            take_control = ct_ is not None and (et is None or (ct_[0], ct_[1]) < (et[0], et[1]))
            if take_control:
                time_ns, seq, token, data = heappop(ch)
                if time_ns > horizon:
                    break
                if time_ns < self.clock_ns:
                    raise RuntimeError(
                        f"control event at {time_ns} scheduled in the past "
                        f"(clock {self.clock_ns})"
                    )
                self.clock_ns = time_ns
                if self.trace_enabled:
                    self._mix_trace(time_ns, 1 << 40 | token, data)
                self._callback(token, data, time_ns)
            else:
                time_ns, seq, pid = heappop(eh)
                port = self.ports[pid]
                if seq != port.sched_seq:
                    continue  # superseded entry
                if time_ns > horizon:
                    break
                if time_ns < self.clock_ns:
                    raise RuntimeError(
                        f"port {pid} woken at {time_ns}, before clock "
                        f"{self.clock_ns}"
                    )
                self.clock_ns = time_ns
                port.sched_time = INF
                port.sched_seq = -1
                if self.trace_enabled:
                    self._mix_trace(time_ns, pid, port.queue_bits[1])
                self._handle(port, time_ns)
                self._reschedule(port)
        self.clock_ns = horizon
