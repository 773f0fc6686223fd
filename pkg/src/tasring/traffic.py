"""Workload synthesis: periodic stream requests with random lifetimes.

Each switch hosts one scheduled-traffic source.  Stream requests arrive
per source as a Poisson process (pi requests per second), live for an
exponentially distributed duration (mean tau seconds) and target the
sink hop_count in {1..5} switch-to-switch hops away.

Randomness is split with numpy SeedSequence keyed on (seed, replication,
purpose, source) so the stream workload never shares draws with the
background-traffic generator; changing the background intensity cannot
perturb stream arrivals.
"""

from __future__ import annotations

import numpy as np

from .model import NS_PER_S, StreamSpec

# Purpose tags for seed splitting.
_KIND_STREAMS = 0
_KIND_KERNEL = 1


def generate_streams(
    seed: int,
    replication: int,
    n_sources: int,
    pi_per_s: float,
    tau_s: float,
    horizon_ns: int,
    max_hops: int = 5,
) -> list[StreamSpec]:
    """Stream requests from all sources, ordered by request time.

    Flow ids are assigned in request order, so they are stable for a
    given (seed, replication) regardless of how the caller batches runs.
    """
    raw: list[tuple[int, int, int, int]] = []
    if pi_per_s > 0:
        mean_gap_ns = NS_PER_S / pi_per_s
        mean_life_ns = tau_s * NS_PER_S
        for src in range(n_sources):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([seed, replication, _KIND_STREAMS, src]))
            )
            t = 0.0
            while True:
                t += rng.exponential(mean_gap_ns)
                if t >= horizon_ns:
                    break
                duration = max(1, int(rng.exponential(mean_life_ns)))
                hops = int(rng.integers(1, max_hops + 1))
                raw.append((int(t), src, hops, duration))
    raw.sort(key=lambda r: (r[0], r[1]))
    return [
        StreamSpec(
            flow_id=i,
            gateway=src,
            hop_count=hops,
            start_ns=start,
            duration_ns=duration,
        )
        for i, (start, src, hops, duration) in enumerate(raw)
    ]


def kernel_seed(seed: int, replication: int) -> int:
    """64-bit seed for the in-kernel background-traffic generator.

    Drawn from a disjoint SeedSequence branch so data-plane randomness is
    independent of the stream workload above.
    """
    ss = np.random.SeedSequence([seed, replication, _KIND_KERNEL])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
