"""Slot sizing and admission control, including a brute-force oracle.

The oracle enumerates every one-percent slot width from zero to the
ninety-percent cap and decides admission from first principles; the
production routine must agree on both the verdict and the chosen width
for thousands of randomized request sequences.
"""

import random

import pytest

from tasring.admission import (
    initial_slot_ns,
    make_policy,
    release,
    synthesize_gcl,
    try_admit,
)
from tasring.model import (
    CLS_BE,
    CLS_CDT,
    CLS_ST,
    NS_PER_S,
    PortResourceState,
    StreamSpec,
)

CT = 50_000
RATE = 1_000_000_000


def make_spec(flow_id, gamma=1, frame_bytes=64):
    return StreamSpec(
        flow_id=flow_id,
        gateway=0,
        hop_count=1,
        start_ns=0,
        duration_ns=10 * CT,
        gamma=gamma,
        frame_bytes=frame_bytes,
    )


def make_port(slot_ns, rate=RATE):
    return PortResourceState(0, rate, CT, slot_ns)


def cap_bits(slot_ns, rate=RATE):
    return slot_ns * rate // NS_PER_S


# ---------------------------------------------------------------- policies


def test_policy_shapes():
    cen = make_policy("centralized", True, CT, 0.2)
    assert cen.step_ns == 500
    assert cen.max_slot_ns == 45_000
    assert cen.floor_busy_ns == 10_000
    assert cen.floor_empty_ns == 10_000
    assert cen.reconfigurable

    dec = make_policy("distributed", True, CT, 0.2)
    assert dec.floor_busy_ns == 500
    assert dec.floor_empty_ns == 0
    assert dec.reconfigurable

    pinned = make_policy("centralized", False, CT, 0.2)
    assert not pinned.reconfigurable
    assert pinned.floor_busy_ns == 10_000


def test_initial_slot():
    assert initial_slot_ns("centralized", True, CT, 0.2) == 10_000
    assert initial_slot_ns("centralized", False, CT, 0.2) == 10_000
    assert initial_slot_ns("distributed", False, CT, 0.2) == 10_000
    # A reconfigurable fabric starts with the gate fully closed.
    assert initial_slot_ns("distributed", True, CT, 0.2) == 0


# ----------------------------------------------------------- basic verdicts


def test_admit_fits_without_growth():
    port = make_port(10_000)
    policy = make_policy("centralized", True, CT, 0.2)
    decision = try_admit(port, make_spec(1), policy)
    assert decision.admitted and decision.reason == "fits"
    assert decision.st_slot_ns == 10_000
    assert port.demands == {1: 512}


def test_admit_grows_to_minimal_step():
    port = make_port(500)
    policy = make_policy("distributed", True, CT, 0.2)
    for flow in range(3):
        decision = try_admit(port, make_spec(flow), policy)
        assert decision.admitted
    # Three 512-bit reservations need 1536 bits: 1500 ns carries only
    # 1500 bits, so the slot lands on 2000 ns.
    assert port.st_slot_ns == 2_000
    assert decision.reason == "grown"


def test_admit_rejects_when_pinned():
    port = make_port(500)
    policy = make_policy("centralized", False, CT, 0.2)
    decision = try_admit(port, make_spec(1), policy)
    assert not decision.admitted and decision.reason == "no-capacity"
    assert port.demands == {} and port.st_slot_ns == 500


def test_admit_rejects_at_max_slot():
    port = make_port(45_000)
    policy = make_policy("centralized", True, CT, 0.2)
    for flow in range(87):
        assert try_admit(port, make_spec(flow), policy).admitted
    # The 88th stream would need 45_056 bits but the cap holds 45_000.
    decision = try_admit(port, make_spec(87), policy)
    assert not decision.admitted and decision.reason == "at-max-slot"
    assert decision.st_slot_ns == 45_000
    assert len(port.demands) == 87


def test_admit_rejects_duplicate_flow():
    port = make_port(10_000)
    policy = make_policy("centralized", True, CT, 0.2)
    assert try_admit(port, make_spec(5), policy).admitted
    decision = try_admit(port, make_spec(5), policy)
    assert not decision.admitted and decision.reason == "duplicate"
    assert port.demands == {5: 512}


def test_dry_run_leaves_port_untouched():
    port = make_port(500)
    policy = make_policy("distributed", True, CT, 0.2)
    decision = try_admit(port, make_spec(1), policy, commit=False)
    assert decision.admitted
    assert port.demands == {} and port.st_slot_ns == 500


def test_growth_respects_busy_floor():
    # A fully drained distributed port sits at zero; growth starts from
    # the busy floor, so a 256-bit request lands exactly on it.
    port = make_port(0)
    policy = make_policy("distributed", True, CT, 0.2)
    decision = try_admit(port, make_spec(1, frame_bytes=32), policy)
    assert decision.admitted
    assert port.st_slot_ns == 500


# ------------------------------------------------------------------ release


def test_release_shrinks_to_minimal_cover():
    port = make_port(45_000)
    policy = make_policy("distributed", True, CT, 0.2)
    for flow in range(87):
        try_admit(port, make_spec(flow), policy)
    for flow in range(80):
        release(port, flow, policy)
    # Seven streams need 3584 bits: 3500 ns misses, so 4000 ns covers.
    assert port.st_slot_ns == 4_000
    assert len(port.demands) == 7


def test_release_to_empty_floor():
    policy_dec = make_policy("distributed", True, CT, 0.2)
    port = make_port(0)
    try_admit(port, make_spec(1), policy_dec)
    assert release(port, 1, policy_dec) == 0

    policy_cen = make_policy("centralized", True, CT, 0.2)
    port = make_port(10_000)
    try_admit(port, make_spec(1), policy_cen)
    assert release(port, 1, policy_cen) == 10_000


def test_release_clamps_to_busy_floor():
    policy = make_policy("centralized", True, CT, 0.2)
    port = make_port(10_000)
    for flow in range(2):
        try_admit(port, make_spec(flow), policy)
    release(port, 0, policy)
    # One stream needs only 512 bits, but the busy floor is 10_000 ns.
    assert port.st_slot_ns == 10_000
    assert port.demands == {1: 512}


def test_release_without_reconfig_keeps_slot():
    policy = make_policy("centralized", False, CT, 0.2)
    port = make_port(10_000)
    try_admit(port, make_spec(1), policy)
    assert release(port, 1, policy) == 10_000
    assert port.demands == {}


def test_release_unknown_flow_raises():
    policy = make_policy("centralized", True, CT, 0.2)
    port = make_port(10_000)
    with pytest.raises(KeyError):
        release(port, 42, policy)


def test_release_never_grows_slot():
    policy = make_policy("distributed", True, CT, 0.2)
    port = make_port(1_000)
    for flow in range(2):
        try_admit(port, make_spec(flow), policy)
    before = port.st_slot_ns
    after = release(port, 0, policy)
    assert after <= max(before, policy.floor_busy_ns)


# ----------------------------------------------------------------- the GCL


def test_synthesize_gcl_two_entries():
    gcl = synthesize_gcl(10_000, CT)
    assert gcl.cycle_ns == CT
    assert len(gcl.entries) == 2
    slot, rest = gcl.entries
    assert slot.duration_ns == 10_000 and rest.duration_ns == 40_000
    assert slot.is_open(CLS_CDT) and slot.is_open(CLS_ST) and not slot.is_open(CLS_BE)
    assert rest.is_open(CLS_CDT) and rest.is_open(CLS_BE) and not rest.is_open(CLS_ST)


def test_synthesize_gcl_zero_slot():
    gcl = synthesize_gcl(0, CT)
    assert len(gcl.entries) == 1
    only = gcl.entries[0]
    assert only.duration_ns == CT
    assert only.is_open(CLS_CDT) and only.is_open(CLS_BE)
    assert not only.is_open(CLS_ST)


def test_synthesize_gcl_bounds():
    synthesize_gcl(45_000, CT)
    with pytest.raises(ValueError):
        synthesize_gcl(45_500, CT)
    with pytest.raises(ValueError):
        synthesize_gcl(-500, CT)


# ------------------------------------------------------- brute-force oracle


def oracle_admit(port, spec, policy):
    """Decide admission by scanning every legal slot width."""
    if spec.flow_id in port.demands:
        return False, port.st_slot_ns
    total = port.total_demand_bits() + spec.cycle_demand_bits()
    if cap_bits(port.st_slot_ns, port.link_rate_bps) >= total:
        return True, port.st_slot_ns
    if not policy.reconfigurable:
        return False, port.st_slot_ns
    base = max(port.st_slot_ns, policy.floor_busy_ns)
    for slot in range(0, policy.max_slot_ns + 1, policy.step_ns):
        if slot >= base and cap_bits(slot, port.link_rate_bps) >= total:
            return True, slot
    return False, port.st_slot_ns


def oracle_release(port, flow_id, policy):
    """Minimal covering slot after removing one reservation."""
    residual = port.total_demand_bits() - port.demands[flow_id]
    if not policy.reconfigurable:
        return port.st_slot_ns
    if residual == 0:
        return policy.floor_empty_ns
    for slot in range(0, policy.max_slot_ns + 1, policy.step_ns):
        if slot < policy.floor_busy_ns:
            continue
        if cap_bits(slot, port.link_rate_bps) >= residual:
            return min(slot, max(port.st_slot_ns, policy.floor_busy_ns))
    return port.st_slot_ns


def test_admission_matches_oracle_randomized():
    rng = random.Random(20_260_814)
    policies = [
        make_policy("centralized", True, CT, 0.2),
        make_policy("distributed", True, CT, 0.2),
        make_policy("centralized", False, CT, 0.2),
        make_policy("centralized", True, CT, 0.05),
        make_policy("distributed", True, CT, 0.4),
    ]
    checked = 0
    for case in range(10_000):
        policy = policies[case % len(policies)]
        start_pct = rng.randrange(0, 91)
        port = make_port(start_pct * 500)
        live = []
        for step in range(rng.randrange(2, 9)):
            if live and rng.random() < 0.3:
                victim = live.pop(rng.randrange(len(live)))
                want = oracle_release(port, victim, policy)
                got = release(port, victim, policy)
                assert got == want == port.st_slot_ns, (case, step)
                checked += 1
                continue
            gamma = rng.choice((1, 1, 1, 2, 4, 30))
            spec = make_spec(flow_id=step, gamma=gamma)
            want_admit, want_slot = oracle_admit(port, spec, policy)
            decision = try_admit(port, spec, policy)
            assert decision.admitted == want_admit, (case, step)
            if want_admit:
                assert port.st_slot_ns == want_slot, (case, step)
                assert decision.st_slot_ns == want_slot
                live.append(spec.flow_id)
            else:
                assert spec.flow_id not in port.demands
            checked += 1
    assert checked > 40_000
