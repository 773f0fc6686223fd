"""Per-run measurement aggregates and their CSV projection."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class MetricsReport:
    """Everything one run reports, in I/O units (microseconds, bits/s).

    Delay statistics cover frames delivered at sinks; dropped frames show
    up in the loss ratios only.  Stream accounting follows the run-to-
    completion rule: a stream counts as admitted here only if its whole
    lifetime fits before the horizon, and streams still mid-life at the
    horizon are excluded from the admission ratio entirely.
    """

    st_mean_delay_us: float = 0.0
    st_max_delay_us: float = 0.0
    st_throughput_bps: float = 0.0
    st_loss_ratio: float = 0.0
    be_mean_delay_us: float = 0.0
    be_max_delay_us: float = 0.0
    be_throughput_bps: float = 0.0
    be_loss_ratio: float = 0.0
    st_frames_offered: int = 0
    st_frames_delivered: int = 0
    st_frames_dropped: int = 0
    be_frames_offered: int = 0
    be_frames_delivered: int = 0
    be_frames_dropped: int = 0
    streams_generated: int = 0
    streams_admitted: int = 0
    streams_rejected: int = 0
    streams_completed: int = 0
    admission_ratio: float = 1.0
    admission_defined: int = 0
    signaling_mean_delay_us: float = 0.0
    signaling_min_delay_us: float = 0.0
    signaling_max_delay_us: float = 0.0
    signaling_samples: int = 0
    signaling_overhead_bps: float = 0.0

    def __post_init__(self) -> None:
        assert 0.0 <= self.st_loss_ratio <= 1.0
        assert 0.0 <= self.be_loss_ratio <= 1.0
        assert 0.0 <= self.admission_ratio <= 1.0
        assert self.st_max_delay_us >= self.st_mean_delay_us >= 0.0
        assert self.be_max_delay_us >= self.be_mean_delay_us >= 0.0
        assert self.streams_admitted >= self.streams_completed


def admission_ratio(completed: int, rejected: int) -> tuple[float, bool]:
    """Completed over decided streams; (1.0, undefined) when none decided."""
    decided = completed + rejected
    if decided == 0:
        return 1.0, False
    return completed / decided, True


def loss_ratio(dropped: int, offered: int) -> float:
    if offered == 0:
        return 0.0
    return dropped / offered


def mean_us(total_ns: int, count: int) -> float:
    if count == 0:
        return 0.0
    return total_ns / count / 1000.0


def throughput_bps(bits: int, horizon_ns: int) -> float:
    return bits * 1_000_000_000 / horizon_ns


def build_report(
    kernel_counters: dict,
    horizon_ns: int,
    streams_generated: int,
    streams_admitted: int,
    streams_rejected: int,
    streams_completed: int,
    signaling_delays_ns: list[int],
    signaling_bits: int,
) -> MetricsReport:
    """Fold kernel counters and control-plane tallies into one report."""
    from .model import CLS_BE, CLS_ST

    created = kernel_counters["created"]
    delivered = kernel_counters["delivered"]
    dropped = kernel_counters["dropped"]
    bits = kernel_counters["delivered_bits"]
    dsum = kernel_counters["delay_sum_ns"]
    dmax = kernel_counters["delay_max_ns"]

    ratio, defined = admission_ratio(streams_completed, streams_rejected)
    n_sig = len(signaling_delays_ns)
    return MetricsReport(
        st_mean_delay_us=mean_us(dsum[CLS_ST], delivered[CLS_ST]),
        st_max_delay_us=dmax[CLS_ST] / 1000.0,
        st_throughput_bps=throughput_bps(bits[CLS_ST], horizon_ns),
        st_loss_ratio=loss_ratio(dropped[CLS_ST], created[CLS_ST]),
        be_mean_delay_us=mean_us(dsum[CLS_BE], delivered[CLS_BE]),
        be_max_delay_us=dmax[CLS_BE] / 1000.0,
        be_throughput_bps=throughput_bps(bits[CLS_BE], horizon_ns),
        be_loss_ratio=loss_ratio(dropped[CLS_BE], created[CLS_BE]),
        st_frames_offered=created[CLS_ST],
        st_frames_delivered=delivered[CLS_ST],
        st_frames_dropped=dropped[CLS_ST],
        be_frames_offered=created[CLS_BE],
        be_frames_delivered=delivered[CLS_BE],
        be_frames_dropped=dropped[CLS_BE],
        streams_generated=streams_generated,
        streams_admitted=streams_admitted,
        streams_rejected=streams_rejected,
        streams_completed=streams_completed,
        admission_ratio=ratio,
        admission_defined=int(defined),
        signaling_mean_delay_us=(sum(signaling_delays_ns) / n_sig / 1000.0) if n_sig else 0.0,
        signaling_min_delay_us=(min(signaling_delays_ns) / 1000.0) if n_sig else 0.0,
        signaling_max_delay_us=(max(signaling_delays_ns) / 1000.0) if n_sig else 0.0,
        signaling_samples=n_sig,
        signaling_overhead_bps=throughput_bps(signaling_bits, horizon_ns),
    )


REPORT_COLUMNS = tuple(f.name for f in fields(MetricsReport))
