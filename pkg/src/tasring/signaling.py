"""Shared control-plane plumbing: callback token space and per-flow records.

The kernel's control heap carries (time, token, data) triples; tokens
below 100 are engine timers, 100+s addresses the control endpoint of
switch s and 200+s the endpoint of traffic source s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import StreamSpec

TOK_REQUEST = 1        # a source's registration request falls due (data: flow)
TOK_CNC_RX = 2         # controller receives a request (data: flow)
TOK_DECISION_RX = 3    # source receives the controller's decision (data: flow)
TOK_PUSH_RX = 4        # switch receives a schedule push (data: push index)
TOK_EXPIRY = 5         # a stream's reservation ends (data: flow)
TOK_SWITCH_BASE = 100  # + switch id: in-band control frame delivery
TOK_SOURCE_BASE = 200  # + source id: in-band control frame delivery

OUTCOME_PENDING = "pending"
OUTCOME_ADMITTED = "admitted"
OUTCOME_REJECTED = "rejected"


@dataclass
class FlowState:
    """Runtime record of one stream request."""

    spec: StreamSpec
    direction: int = 1
    path_switches: tuple[int, ...] = ()  # switches whose ring port is reserved
    dest_switch: int = 0
    path_ports: tuple[int, ...] = ()
    outcome: str = OUTCOME_PENDING
    decision_ns: int = -1
    release_ns: int = -1
    # Hop-by-hop bookkeeping (distributed model only).
    switch_sent_cdt: int = 0
    commit_order: list[int] = field(default_factory=list)


@dataclass
class RunStats:
    """Control-plane tallies folded into the final report."""

    admitted: int = 0
    rejected: int = 0
    completed: int = 0
    signaling_delays_ns: list[int] = field(default_factory=list)
    controller_cdt_bits: int = 0
