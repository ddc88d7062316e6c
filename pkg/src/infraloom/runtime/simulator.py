"""Discrete-event simulation of warm-pool dynamics under a request workload.

Model: each request takes an idle, still-warm instance if one exists
(most-recently-used first, so unused instances decay out of the pool),
otherwise spawns or reheats an instance paying the cold-start penalty, up
to the instance cap; beyond the cap requests queue FIFO and latency
includes the queue wait. An instance is warm iff it was used less than the
expiry window ago. Warming events fire every N minutes and refresh the
most recently used idle instances, up to the warm-pool target; busy
instances are warm by definition and are not touched. The simulation is
fully deterministic for a given workload.
"""

from __future__ import annotations

import csv
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from ..schema import WarmingConfig

MINUTE_MS = 60_000.0


class InvalidWorkload(Exception):
    pass


@dataclass
class WarmPoolState:
    """Pool parameters plus (optionally pre-seeded) instance state.

    ``instances`` holds last-used timestamps of pre-existing idle
    instances; a fresh deployment starts empty.
    """

    max_instances: int = 1000
    expiry_minutes: float = 15.0
    cold_start_ms: float = 400.0
    service_time_ms: float = 200.0
    warm_pool_target: int = 1
    instances: list[float] = field(default_factory=list)

    @property
    def max_throughput_rps(self) -> float:
        return self.max_instances * 1000.0 / self.service_time_ms


@dataclass(frozen=True)
class Metrics:
    cold_fraction: float
    p50_latency_ms: float
    p99_latency_ms: float
    max_throughput_rps: float
    peak_instances: int
    served_rps: float
    dropped_requests: int
    total_requests: int
    measured_requests: int
    cold_starts: int
    final_warm_instances: int

    def to_dict(self) -> dict:
        return {
            "cold_fraction": self.cold_fraction,
            "p50_latency_ms": self.p50_latency_ms,
            "p99_latency_ms": self.p99_latency_ms,
            "max_throughput_rps": self.max_throughput_rps,
            "peak_instances": self.peak_instances,
            "served_rps": self.served_rps,
            "dropped_requests": self.dropped_requests,
            "total_requests": self.total_requests,
            "measured_requests": self.measured_requests,
            "cold_starts": self.cold_starts,
            "final_warm_instances": self.final_warm_instances,
        }


def simulate_warm_pool(
    workload: list[tuple[float, int]],
    state: WarmPoolState,
    warming: WarmingConfig,
    *,
    metrics_from_ms: float = 0.0,
) -> Metrics:
    """Run the workload through the pool and report latency/cold metrics.

    ``workload`` rows are (arrival_ms, concurrency_demand): the demand is
    the number of simultaneous requests arriving at that instant. Arrivals
    must be sorted ascending. Metrics cover requests arriving at or after
    ``metrics_from_ms``, which lets callers exclude a warm-up window.
    """
    for (a, _), (b, _) in zip(workload, workload[1:]):
        if b < a:
            raise InvalidWorkload("arrival times must be sorted ascending")
    for arrival, demand in workload:
        if demand < 0:
            raise InvalidWorkload("concurrency demand must be nonnegative")

    expiry_ms = state.expiry_minutes * MINUTE_MS
    pool = _Pool(state, expiry_ms)

    horizon = workload[-1][0] if workload else 0.0
    ticks: list[float] = []
    if warming.enabled:
        period_ms = warming.period_minutes * MINUTE_MS
        ticks = [k * period_ms for k in range(1, int(horizon // period_ms) + 1)]

    records: list[tuple[float, float, bool]] = []  # (arrival, latency, cold)
    peak = 0
    tick_idx = 0
    for arrival, demand in workload:
        while tick_idx < len(ticks) and ticks[tick_idx] <= arrival:
            pool.warming_tick(ticks[tick_idx], state.warm_pool_target)
            tick_idx += 1
        for _ in range(demand):
            latency, cold = pool.request(arrival)
            records.append((arrival, latency, cold))
            peak = max(peak, pool.warm_count())
    for tick in ticks[tick_idx:]:
        pool.warming_tick(tick, state.warm_pool_target)

    measured = [(lat, cold) for t, lat, cold in records if t >= metrics_from_ms]
    latencies = sorted(lat for lat, _ in measured)
    cold_measured = sum(1 for _, cold in measured if cold)

    if measured:
        first_arrival = min(t for t, _, _ in records if t >= metrics_from_ms)
        last_completion = max(t + lat for t, lat, _ in records if t >= metrics_from_ms)
        span_ms = last_completion - first_arrival
        served_rps = len(measured) * 1000.0 / span_ms if span_ms > 0 else 0.0
    else:
        served_rps = 0.0

    end_of_run = max(
        [horizon]
        + [t + lat for t, lat, _ in records]
        + ([ticks[-1]] if ticks else [])
    ) if (records or ticks or workload) else 0.0
    final_warm = pool.warm_count_at(end_of_run)

    return Metrics(
        cold_fraction=(cold_measured / len(measured)) if measured else 0.0,
        p50_latency_ms=_percentile(latencies, 0.50),
        p99_latency_ms=_percentile(latencies, 0.99),
        max_throughput_rps=state.max_throughput_rps,
        peak_instances=peak,
        served_rps=served_rps,
        dropped_requests=0,  # the queue is unbounded; nothing is ever shed
        total_requests=len(records),
        measured_requests=len(measured),
        cold_starts=sum(1 for _, _, cold in records if cold),
        final_warm_instances=final_warm,
    )


class _Pool:
    """Instance bookkeeping: a busy heap, a warm-idle deque, a cold stack.

    The idle deque stays sorted by last-used time (oldest left), so expiry
    is a popleft sweep and the most recently used idle instance is the
    rightmost entry.
    """

    def __init__(self, state: WarmPoolState, expiry_ms: float):
        self.state = state
        self.expiry_ms = expiry_ms
        self.busy: list[tuple[float, int, int]] = []  # (busy_until, seq, id)
        self.idle: deque[tuple[float, int]] = deque(
            (last_used, i) for i, last_used in enumerate(sorted(state.instances))
        )
        self.cold: list[int] = []
        self.count = len(state.instances)
        self._seq = 0

    def _settle(self, now: float) -> None:
        while self.busy and self.busy[0][0] <= now:
            busy_until, _, instance = heapq.heappop(self.busy)
            self.idle.append((busy_until, instance))
        while self.idle and now - self.idle[0][0] >= self.expiry_ms:
            _, instance = self.idle.popleft()
            self.cold.append(instance)

    def request(self, now: float) -> tuple[float, bool]:
        """Assign one request; returns (latency_ms, was_cold_start)."""
        self._settle(now)
        service = self.state.service_time_ms
        cold_penalty = self.state.cold_start_ms

        if self.idle:
            _, instance = self.idle.pop()  # most recently used warm instance
            start, latency, cold = now, service, False
        elif self.count < self.state.max_instances:
            instance = self.count
            self.count += 1
            start, latency, cold = now, cold_penalty + service, True
        elif self.cold:
            instance = self.cold.pop()
            start, latency, cold = now, cold_penalty + service, True
        else:
            # Saturated: chain onto the earliest-free instance (FIFO queue);
            # the handoff is warm and latency includes the wait.
            busy_until, _, instance = heapq.heappop(self.busy)
            start = busy_until
            latency, cold = (busy_until - now) + service, False

        busy_until = start + (cold_penalty + service if cold else service)
        self._seq += 1
        heapq.heappush(self.busy, (busy_until, self._seq, instance))
        return latency, cold

    def warming_tick(self, now: float, target: int) -> None:
        """Refresh the last-used stamp of up to ``target`` idle instances.

        Still-warm instances are preferred (most recently used first); if
        the target is not met, expired instances are reheated — the warming
        invocation pays their cold start invisibly, since it is not a user
        request. Busy instances are inherently warm and are not touched.
        """
        self._settle(now)
        refreshed = [self.idle.pop() for _ in range(min(len(self.idle), target))]
        for _ in range(min(len(self.cold), target - len(refreshed))):
            refreshed.append((now, self.cold.pop()))
        for _, instance in reversed(refreshed):
            self.idle.append((now, instance))

    def warm_count(self) -> int:
        return len(self.busy) + len(self.idle)

    def warm_count_at(self, now: float) -> int:
        self._settle(now)
        return self.warm_count()


def _percentile(sorted_values: list[float], q: float) -> float:
    """Nearest-rank percentile; 0.0 for an empty sample."""
    if not sorted_values:
        return 0.0
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def read_workload_csv(lines: Iterable[str]) -> list[tuple[float, int]]:
    """Parse an ``arrival_ms,concurrency`` CSV; a header row is optional."""
    rows: list[tuple[float, int]] = []
    for i, record in enumerate(csv.reader(lines)):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != 2:
            raise InvalidWorkload(f"row {i + 1}: expected 2 columns, got {len(record)}")
        first = record[0].strip()
        if i == 0 and not _is_number(first):
            continue  # header row
        if not _is_number(first) or not _is_number(record[1].strip()):
            raise InvalidWorkload(f"row {i + 1}: non-numeric value")
        rows.append((float(first), int(float(record[1]))))
    return rows


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False
