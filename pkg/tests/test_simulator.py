"""Warm-pool simulator behavior and the cost model."""

import io

import pytest

from infraloom.runtime.cost import CostParams, estimate_cost, warming_invocations_per_month
from infraloom.runtime.simulator import (
    InvalidWorkload,
    WarmPoolState,
    read_workload_csv,
    simulate_warm_pool,
)
from infraloom.schema import WarmingConfig

WARMING_OFF = WarmingConfig(enabled=False)
WARMING_5 = WarmingConfig(enabled=True, period_minutes=5)

MINUTE = 60_000.0


def _state(**kwargs) -> WarmPoolState:
    return WarmPoolState(**kwargs)


def test_max_throughput_formula():
    state = _state(max_instances=1000, service_time_ms=200.0)
    metrics = simulate_warm_pool([], state, WARMING_OFF)
    assert metrics.max_throughput_rps == 5000.0


def test_empty_workload():
    metrics = simulate_warm_pool([], _state(), WARMING_OFF)
    assert metrics.cold_fraction == 0.0
    assert metrics.peak_instances == 0
    assert metrics.total_requests == 0


def test_single_request_is_cold():
    metrics = simulate_warm_pool([(0.0, 1)], _state(), WARMING_OFF)
    assert metrics.cold_fraction == 1.0
    assert metrics.cold_starts == 1
    assert metrics.peak_instances == 1
    assert metrics.p50_latency_ms == 600.0  # 400 cold + 200 service


def test_second_request_within_expiry_is_warm():
    metrics = simulate_warm_pool([(0.0, 1), (MINUTE, 1)], _state(), WARMING_OFF)
    assert metrics.cold_starts == 1
    assert metrics.cold_fraction == 0.5


def test_gaps_beyond_expiry_all_cold():
    workload = [(k * 20 * MINUTE, 1) for k in range(12)]
    metrics = simulate_warm_pool(workload, _state(expiry_minutes=15.0), WARMING_OFF)
    assert metrics.cold_fraction == 1.0


def test_warming_keeps_sparse_traffic_warm():
    # 20-minute gaps far beyond the 15-minute expiry, but warming every 5
    # minutes refreshes the pool, so only the very first request is cold.
    workload = [(k * 20 * MINUTE, 1) for k in range(12)]
    metrics = simulate_warm_pool(workload, _state(expiry_minutes=15.0), WARMING_5)
    assert metrics.cold_starts == 1
    post_warmup = simulate_warm_pool(
        workload, _state(expiry_minutes=15.0), WARMING_5, metrics_from_ms=5 * MINUTE
    )
    assert post_warmup.cold_fraction < 0.01


def test_queueing_when_saturated():
    # One instance, two simultaneous requests: the second waits for the first.
    state = _state(max_instances=1, cold_start_ms=100.0, service_time_ms=200.0)
    metrics = simulate_warm_pool([(0.0, 2)], state, WARMING_OFF)
    assert metrics.total_requests == 2
    assert metrics.cold_starts == 1
    # First: 100 + 200 = 300. Second: waits 300, then serves warm: 500 total.
    assert metrics.p99_latency_ms == 500.0
    assert metrics.peak_instances == 1


def test_throughput_ceiling_never_exceeded():
    state = _state(max_instances=10, service_time_ms=100.0)  # 100 rps ceiling
    workload = [(ms * 1.0, 2) for ms in range(0, 2000, 5)]  # 400 rps offered
    metrics = simulate_warm_pool(workload, state, WARMING_OFF)
    assert metrics.served_rps <= state.max_throughput_rps * 1.001
    assert metrics.dropped_requests == 0


def test_scale_down_to_warming_floor():
    # A burst of 50 concurrent requests, then one request per minute for
    # well past the expiry window: the warm pool decays to the floor.
    state = _state(expiry_minutes=15.0, warm_pool_target=1)
    workload = [(0.0, 50)]
    workload += [(30 * MINUTE + k * MINUTE, 1) for k in range(25)]
    metrics = simulate_warm_pool(workload, state, WARMING_5)
    assert metrics.peak_instances >= 50
    assert metrics.final_warm_instances <= state.warm_pool_target + 1


def test_warming_reheats_expired_instances():
    # Expiry shorter than the warming period: each tick must reheat the
    # expired instance, so a request shortly after a tick is still warm.
    state = _state(expiry_minutes=4.0)
    workload = [(0.0, 1), (5 * MINUTE + 1000.0, 1)]
    metrics = simulate_warm_pool(workload, state, WARMING_5)
    assert metrics.cold_starts == 1


def test_warming_tick_processed_before_same_time_arrival():
    state = _state(expiry_minutes=4.0)
    workload = [(0.0, 1), (5 * MINUTE, 1)]  # arrival exactly on the tick
    metrics = simulate_warm_pool(workload, state, WARMING_5)
    assert metrics.cold_starts == 1


def test_warming_on_empty_pool_is_noop():
    metrics = simulate_warm_pool([(20 * MINUTE, 1)], _state(), WARMING_5)
    # Ticks at 5/10/15/20 min touch nothing until the pool exists, so the
    # first and only request is still a cold start.
    assert metrics.cold_starts == 1
    assert metrics.peak_instances == 1


def test_preseeded_warm_instance_serves_first_request_warm():
    state = _state(instances=[0.0])
    metrics = simulate_warm_pool([(1000.0, 1)], state, WARMING_OFF)
    assert metrics.cold_starts == 0
    assert metrics.p50_latency_ms == state.service_time_ms


def test_unsorted_workload_rejected():
    with pytest.raises(InvalidWorkload):
        simulate_warm_pool([(100.0, 1), (50.0, 1)], _state(), WARMING_OFF)


def test_deterministic():
    workload = [(k * 250.0, 3) for k in range(200)]
    a = simulate_warm_pool(workload, _state(max_instances=5), WARMING_5)
    b = simulate_warm_pool(workload, _state(max_instances=5), WARMING_5)
    assert a == b


def test_latency_includes_queue_wait_fifo():
    state = _state(max_instances=1, cold_start_ms=0.0, service_time_ms=100.0)
    metrics = simulate_warm_pool([(0.0, 3)], state, WARMING_OFF)
    # Completion times 100, 200, 300 -> latencies 100, 200, 300.
    assert metrics.p50_latency_ms == 200.0
    assert metrics.p99_latency_ms == 300.0


# -- workload CSV -----------------------------------------------------------


def test_read_workload_with_header():
    rows = read_workload_csv(io.StringIO("arrival_ms,concurrency\n0,1\n500,2\n"))
    assert rows == [(0.0, 1), (500.0, 2)]


def test_read_workload_without_header():
    rows = read_workload_csv(io.StringIO("0,1\n500,2\n"))
    assert rows == [(0.0, 1), (500.0, 2)]


def test_read_workload_malformed():
    with pytest.raises(InvalidWorkload):
        read_workload_csv(io.StringIO("0,1\nbad,row\n"))
    with pytest.raises(InvalidWorkload):
        read_workload_csv(io.StringIO("0,1,2\n"))


# -- cost model -------------------------------------------------------------


def test_zero_requests_warming_off_costs_nothing():
    params = CostParams(price_per_request=2e-7, price_per_gb_second=1.7e-5)
    assert estimate_cost(params) == 0.0


def test_cost_linear_in_requests():
    def cost(requests: float) -> float:
        return estimate_cost(
            CostParams(
                price_per_request=2e-7,
                price_per_gb_second=1.7e-5,
                memory_gb=3.0,
                requests_per_month=requests,
                avg_duration_ms=200.0,
                warming_per_month=0.0,
            )
        )

    assert cost(200_000) == pytest.approx(2 * cost(100_000), rel=1e-12)


def test_cost_matches_hand_computed_fixture():
    # Hand-computed: 100k requests at 100 ms and 2 GB -> 20_000 GB-s;
    # 1000 warming calls at the fixed 10 ms -> 20 GB-s; total 20_020 GB-s.
    # 20_020 * 2e-5 = 0.4004 plus requests 100_000 * 1e-6 = 0.1.
    params = CostParams(
        price_per_request=1e-6,
        price_per_gb_second=2e-5,
        memory_gb=2.0,
        requests_per_month=100_000,
        avg_duration_ms=100.0,
        warming_per_month=1000,
    )
    assert estimate_cost(params) == pytest.approx(0.5004, rel=1e-12)


def test_warming_invocations_per_month():
    assert warming_invocations_per_month(5) == 8640.0  # 30*24*60 / 5
    assert warming_invocations_per_month(5, enabled=False) == 0.0


def test_negative_params_rejected():
    with pytest.raises(ValueError):
        estimate_cost(CostParams(price_per_request=-1.0))
