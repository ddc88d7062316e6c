"""Monthly cost model for a deployed application.

Billed dimensions: per-request price plus GB-seconds of execution time.
Warming invocations are nearly free but not free: each one is charged at a
fixed 10 ms of execution, which is what lets the tool show both the "costs
nothing at zero load" view and the real minimum bill side by side.
"""

from __future__ import annotations

from dataclasses import dataclass

WARMING_INVOCATION_MS = 10.0
_MONTH_MINUTES = 30 * 24 * 60  # 30-day month


@dataclass(frozen=True)
class CostParams:
    price_per_request: float = 0.0  # currency per request
    price_per_gb_second: float = 0.0  # currency per GB-second
    memory_gb: float = 3.0
    requests_per_month: float = 0.0
    avg_duration_ms: float = 0.0
    warming_per_month: float = 0.0

    def validate(self) -> None:
        for name, value in vars(self).items():
            if value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")


def warming_invocations_per_month(period_minutes: int, enabled: bool = True) -> float:
    """Warming events in a 30-day month for a rate(N minutes) schedule."""
    if not enabled:
        return 0.0
    return _MONTH_MINUTES / period_minutes


def estimate_cost(params: CostParams) -> float:
    """Monthly cost: request charges plus GB-seconds at the configured price."""
    params.validate()
    request_cost = params.requests_per_month * params.price_per_request
    gb_seconds = (
        params.requests_per_month * params.avg_duration_ms
        + params.warming_per_month * WARMING_INVOCATION_MS
    ) / 1000.0 * params.memory_gb
    return request_cost + gb_seconds * params.price_per_gb_second
