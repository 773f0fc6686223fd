"""End-to-end runs of the ring simulation at short horizons."""

import math

import pytest

from tasring.engine import RunConfig, Simulation, run_once
from tasring.signaling import OUTCOME_ADMITTED


def config(**overrides):
    base = dict(
        model="centralized",
        topology="uni",
        reconfig=True,
        pi=20.0,
        tau_s=0.05,
        rho=1.0,
        horizon_ns=400_000_000,
        seed=5,
    )
    base.update(overrides)
    return RunConfig(**base)


def test_validate_rejects_nonsense():
    with pytest.raises(ValueError):
        RunConfig(model="mesh", topology="uni", reconfig=True,
                  pi=1.0, tau_s=1.0, rho=0.0).validate()
    with pytest.raises(ValueError):
        config(topology="star").validate()
    with pytest.raises(ValueError):
        config(pi=-1.0).validate()
    with pytest.raises(ValueError):
        config(init_ratio=0.95).validate()


def test_same_seed_reproduces_report():
    assert run_once(config()) == run_once(config())


def test_replications_decorrelate():
    a = run_once(config(replication=0))
    b = run_once(config(replication=1))
    assert a != b


def test_simulation_runs_exactly_once():
    sim = Simulation(config(horizon_ns=50_000_000))
    sim.run()
    with pytest.raises(AssertionError):
        sim.run()


def test_scheduled_traffic_is_lossless():
    for model in ("centralized", "distributed"):
        report = run_once(config(model=model, tau_s=0.1))
        assert report.st_frames_dropped == 0
        assert report.st_loss_ratio == 0.0
        assert report.st_frames_delivered > 0


def test_completed_streams_inject_once_per_cycle():
    cfg = config()
    sim = Simulation(cfg)
    sim.run()
    checked = 0
    for rec in sim.flows:
        done = rec.outcome == OUTCOME_ADMITTED and rec.release_ns <= cfg.horizon_ns
        if not done:
            continue
        expected = math.ceil(rec.spec.duration_ns / cfg.ct_ns)
        fid = rec.spec.flow_id
        assert sim.kernel.flow_created[fid] == expected, fid
        assert sim.kernel.flow_delivered[fid] == expected, fid
        checked += 1
    assert checked >= 20


def test_background_traffic_toggles_with_rho():
    silent = run_once(config(rho=0.0, horizon_ns=100_000_000))
    assert silent.be_frames_offered == 0
    assert silent.be_throughput_bps == 0.0
    noisy = run_once(config(rho=1.0, horizon_ns=100_000_000))
    assert noisy.be_frames_offered > 0
    assert noisy.be_throughput_bps > 0.0


def test_no_streams_no_signaling():
    report = run_once(config(pi=0.0, rho=0.0, horizon_ns=100_000_000))
    assert report.streams_generated == 0
    assert report.admission_defined == 0
    assert report.admission_ratio == 1.0
    assert report.signaling_samples == 0
    assert report.st_frames_offered == 0


def test_signaling_accounting_present_when_streams_flow():
    report = run_once(config(horizon_ns=200_000_000))
    assert report.streams_generated > 0
    assert report.admission_defined == 1
    assert report.signaling_samples > 0
    assert report.signaling_overhead_bps > 0.0
    assert report.signaling_min_delay_us > 0.0


def test_distributed_signaling_varies_with_load():
    report = run_once(config(model="distributed", horizon_ns=200_000_000,
                             tau_s=0.1))
    # In-band control frames share links with data, so round trips differ.
    assert report.signaling_max_delay_us > report.signaling_min_delay_us


def test_st_delay_within_physical_bounds():
    report = run_once(config(tau_s=0.1))
    assert 0.0 < report.st_mean_delay_us <= report.st_max_delay_us
    # One cycle of waiting plus a few hops is the worst case here.
    assert report.st_max_delay_us < 120.0
