"""Local runtime: event dispatch, HTTP emulation, and warm-pool simulation."""

from .cost import CostParams, estimate_cost, warming_invocations_per_month
from .dispatch import (
    DispatchTable,
    MissingParam,
    TypeMismatch,
    UnresolvedHandler,
    deserialize_params,
    handle_event,
    load_dispatch_table,
    match_route,
    serialize_result,
)
from .events import Event, Response, event_from_json, event_to_json, response_from_json, response_to_json
from .server import EmulatorServer, process_event_lines
from .simulator import (
    InvalidWorkload,
    Metrics,
    WarmPoolState,
    read_workload_csv,
    simulate_warm_pool,
)

__all__ = [
    "CostParams",
    "DispatchTable",
    "EmulatorServer",
    "Event",
    "InvalidWorkload",
    "Metrics",
    "MissingParam",
    "Response",
    "TypeMismatch",
    "UnresolvedHandler",
    "WarmPoolState",
    "deserialize_params",
    "estimate_cost",
    "event_from_json",
    "event_to_json",
    "handle_event",
    "load_dispatch_table",
    "match_route",
    "process_event_lines",
    "read_workload_csv",
    "response_from_json",
    "response_to_json",
    "serialize_result",
    "simulate_warm_pool",
    "warming_invocations_per_month",
]
