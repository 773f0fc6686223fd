"""Release acceptance: ten checks over a shared desk-scale dataset.

Each test prints one [PASS]/[FAIL] line (visible with -rP or -s).  The
dataset fixture runs the full factorial sweep once per session: both
configuration models, both ring topologies, reconfiguration on and off,
request rates {1, 10, 20}/s and lifetimes {2, 5} s at unit background
load, plus background-load variations and extra replications where a
check needs them.  Ten simulated seconds per cell, fixed seeds.
"""

import math
import random
import time

import pytest

from tasring.admission import make_policy, try_admit
from tasring.harness import (
    MODELS,
    Scenario,
    rows_to_csv,
    run,
    scenario_grid,
    sweep_rows,
)
from tasring.model import NS_PER_S, PortResourceState, StreamSpec, stream_rate_bps

from protocol_harness import run_random_cases
from test_admission import make_spec, oracle_admit

GRID_PI = (1.0, 10.0, 20.0)
GRID_TAU = (2.0, 5.0)
TOPOLOGIES = ("uni", "bi")
COMBOS = tuple(
    (model, topo, rec)
    for model in MODELS
    for topo in TOPOLOGIES
    for rec in (True, False)
)


def verdict(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def dataset():
    core = {}
    started = time.perf_counter()
    for model, topo, rec in COMBOS:
        for pi in GRID_PI:
            for tau in GRID_TAU:
                sc = Scenario(model=model, topology=topo, reconfig=rec,
                              pi=pi, tau_s=tau, rho=1.0)
                core[(model, topo, rec, pi, tau)] = run(sc)
    core_seconds = time.perf_counter() - started

    rho_cells = {}
    for model, topo, rec in COMBOS:
        for rho in (0.1, 2.0):
            sc = Scenario(model=model, topology=topo, reconfig=rec,
                          pi=20.0, tau_s=5.0, rho=rho)
            rho_cells[(model, topo, rec, rho)] = run(sc)

    level = {}
    for model in MODELS:
        sc = Scenario(model=model, topology="bi", reconfig=True,
                      pi=20.0, tau_s=5.0, rho=1.0)
        reports = [core[(model, "bi", True, 20.0, 5.0)]]
        reports += [run(sc, replication=rep) for rep in range(1, 5)]
        level[model] = reports

    return {
        "core": core,
        "rho": rho_cells,
        "level": level,
        "core_seconds": core_seconds,
    }


def test_01_capacity_arithmetic():
    spec = StreamSpec(flow_id=0, gateway=0, hop_count=1, start_ns=0,
                      duration_ns=50_000)
    rate = stream_rate_bps(spec, 50_000)
    port = PortResourceState(0, 1_000_000_000, 50_000, 45_000)
    policy = make_policy("centralized", True, 50_000, 0.2)
    admitted = 0
    while try_admit(port, make_spec(admitted), policy).admitted:
        admitted += 1
    ceiling = math.floor(1_000_000_000 / rate)
    ok = rate == 10_240_000.0 and admitted == 87 and ceiling == 97
    verdict(
        "capacity-arithmetic", ok,
        f"stream rate {rate / 1e6} Mb/s, {admitted} streams at the slot cap, "
        f"{ceiling} on a bare link",
    )


def test_02_zero_st_loss_across_full_sweep(dataset):
    cells = list(dataset["core"].items()) + list(dataset["rho"].items())
    lossy = [key for key, rep in cells
             if rep.st_loss_ratio != 0.0 or rep.st_frames_dropped != 0]
    elapsed = dataset["core_seconds"]
    ok = not lossy and elapsed < 600.0
    verdict(
        "zero-st-loss", ok,
        f"{len(cells) - len(lossy)}/{len(cells)} cells lossless, "
        f"48-cell factorial sweep in {elapsed:.0f} s",
    )


def test_03_uni_centralized_delay_bounds(dataset):
    worst_mean = worst_on = worst_off = 0.0
    for (model, topo, rec, pi, tau), rep in dataset["core"].items():
        if model != "centralized" or topo != "uni":
            continue
        worst_mean = max(worst_mean, rep.st_mean_delay_us)
        if rec:
            worst_on = max(worst_on, rep.st_max_delay_us)
        else:
            worst_off = max(worst_off, rep.st_max_delay_us)
    ok = worst_mean < 100.0 and worst_on <= 115.5 and worst_off <= 66.0
    verdict(
        "uni-centralized-delay", ok,
        f"worst mean {worst_mean:.1f} us, worst max {worst_on:.1f} us "
        f"reconfigured ({worst_off:.1f} us static)",
    )


def test_04_bi_centralized_max_delay(dataset):
    static = []
    worst_rec = 0.0
    for (model, topo, rec, pi, tau), rep in dataset["core"].items():
        if model != "centralized" or topo != "bi":
            continue
        if rec:
            worst_rec = max(worst_rec, rep.st_max_delay_us)
        else:
            assert rep.st_frames_delivered > 0, (pi, tau)
            static.append(rep.st_max_delay_us)
    # Constant near one cycle, give or take one bulk-frame transmission.
    ok = all(38.0 <= v <= 62.0 for v in static) and worst_rec <= 300.0
    verdict(
        "bi-centralized-max-delay", ok,
        f"static cells span [{min(static):.1f}, {max(static):.1f}] us, "
        f"reconfigured worst {worst_rec:.1f} us",
    )


def test_05_admission_reconfig_dominates(dataset):
    core = dataset["core"]
    violations = []
    for model in MODELS:
        for topo in TOPOLOGIES:
            for pi in GRID_PI:
                for tau in GRID_TAU:
                    on = core[(model, topo, True, pi, tau)]
                    off = core[(model, topo, False, pi, tau)]
                    assert on.admission_defined and off.admission_defined
                    if on.admission_ratio < off.admission_ratio:
                        violations.append((model, topo, pi, tau))
    verdict(
        "admission-ordering", not violations,
        f"reconfiguration never lowered the ratio across "
        f"{2 * 2 * len(GRID_PI) * len(GRID_TAU)} matched grid points"
        + (f"; violations: {violations}" if violations else ""),
    )


def test_05_admission_level_bi_reconfig(dataset):
    means = {
        model: sum(r.admission_ratio for r in reports) / len(reports)
        for model, reports in dataset["level"].items()
    }
    ok = all(0.80 <= m <= 1.0 for m in means.values())
    verdict(
        "admission-level", ok,
        "busy two-way ring with reconfiguration admits "
        + ", ".join(f"{m:.3f} ({model}, 5 reps)" for model, m in means.items()),
    )


def test_05_admission_invariant_to_background_load(dataset):
    spreads = {}
    for model, topo, rec in COMBOS:
        ratios = [
            dataset["rho"][(model, topo, rec, 0.1)].admission_ratio,
            dataset["core"][(model, topo, rec, 20.0, 5.0)].admission_ratio,
            dataset["rho"][(model, topo, rec, 2.0)].admission_ratio,
        ]
        spreads[(model, topo, rec)] = max(ratios) - min(ratios)
    worst = max(spreads.values())
    verdict(
        "admission-load-invariance", worst <= 0.02,
        f"largest ratio spread across background loads is {worst:.4f}",
    )


def test_06_be_throughput_plateaus(dataset):
    low = dataset["rho"][("centralized", "uni", False, 0.1)].be_throughput_bps
    unit = dataset["core"][("centralized", "uni", False, 20.0, 5.0)].be_throughput_bps
    high = dataset["rho"][("centralized", "uni", False, 2.0)].be_throughput_bps
    ok = (
        0.09e9 <= low <= 0.11e9
        and 0.90e9 <= unit <= 1.10e9
        and 0.90e9 <= high <= 1.50e9
    )
    verdict(
        "be-throughput-plateau", ok,
        f"delivered {low / 1e9:.3f} / {unit / 1e9:.3f} / {high / 1e9:.3f} Gb/s "
        f"at offered 0.1 / 1.0 / 2.0",
    )


def test_07_signaling_contracts(dataset):
    cells = {**dataset["core"]}
    for (model, topo, rec, rho), rep in dataset["rho"].items():
        cells[(model, topo, rec, 20.0, 5.0, rho)] = rep

    spread = 0.0
    for key, rep in cells.items():
        if key[0] == "centralized" and rep.signaling_samples >= 2:
            spread = max(
                spread, rep.signaling_max_delay_us - rep.signaling_min_delay_us)

    inversions = []
    for key, rep in cells.items():
        if key[0] != "centralized":
            continue
        twin = cells[("decentralized",) + key[1:]]
        if not twin.signaling_overhead_bps > rep.signaling_overhead_bps:
            inversions.append(key)

    bi_worst = max(
        rep.signaling_overhead_bps for key, rep in cells.items()
        if key[0] == "centralized" and key[1] == "bi"
    )
    ok = spread == 0.0 and not inversions and bi_worst < 1e6
    verdict(
        "signaling-contracts", ok,
        f"centralized delay spread {spread} us, decentralized overhead higher "
        f"in {len(cells) // 2 - len(inversions)}/{len(cells) // 2} matched "
        f"cells, centralized two-way worst {bi_worst / 1e3:.1f} kb/s",
    )


def test_08_admission_against_brute_force_oracle():
    rng = random.Random(0xACCE55)
    policy = make_policy("distributed", True, 50_000, 0.2)
    pinned = make_policy("centralized", False, 50_000, 0.2)
    started = time.perf_counter()
    cases = 0
    for case in range(10_000):
        chosen = policy if case % 3 else pinned
        n_ports = rng.randrange(1, 4)
        ports = [
            PortResourceState(p, 1_000_000_000, 50_000, rng.randrange(0, 91) * 500)
            for p in range(n_ports)
        ]
        for flow in range(8):
            spec = make_spec(flow_id=flow, gamma=rng.choice((1, 1, 2, 20)))
            path = ports[: rng.randrange(1, n_ports + 1)]
            want = [oracle_admit(port, spec, chosen) for port in path]
            if all(w[0] for w in want):
                for port, (admit, slot) in zip(path, want):
                    decision = try_admit(port, spec, chosen)
                    assert decision.admitted and port.st_slot_ns == slot
            else:
                # First infeasible hop decides; nothing is committed.
                for port in path:
                    if not oracle_admit(port, spec, chosen)[0]:
                        assert not try_admit(port, spec, chosen).admitted
                        break
                    assert try_admit(port, spec, chosen, commit=False).admitted
            cases += 1
    elapsed = time.perf_counter() - started
    verdict(
        "admission-oracle", elapsed < 30.0,
        f"{cases} randomized multi-port cases matched exactly in {elapsed:.1f} s",
    )


def test_09_protocol_invariants_randomized():
    started = time.perf_counter()
    deliveries = run_random_cases(1_000, seed=77)
    elapsed = time.perf_counter() - started
    verdict(
        "protocol-invariants", deliveries > 10_000,
        f"1000 interleaved registration runs, {deliveries} deliveries, "
        f"no leaks, commit order and message counts exact ({elapsed:.1f} s)",
    )


def test_10_reruns_are_byte_identical():
    grid = scenario_grid(
        Scenario(topology="bi", pi=20.0, tau_s=2.0, rho=1.0,
                 duration_s=0.5, replications=2, seed=31),
        model=["centralized", "decentralized"],
    )
    first = rows_to_csv(sweep_rows(grid))
    second = rows_to_csv(sweep_rows(grid))
    ok = first == second and len(first.splitlines()) == 5
    verdict(
        "csv-determinism", ok,
        f"two sweeps emitted identical CSV bytes ({len(first)} chars)",
    )
