"""Request dispatch against a loaded schema.

The dispatch table is immutable after load and safe to share between
request-serving threads; initialization-once hooks are guarded so they run
exactly once even under concurrent first requests.

Matching precedence: exact path first, then parameterized routes with the
most literal segments (lexicographically smallest route path among equals),
then static routes (GET only), then not-found.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

from ..schema import DynamicRoute, InvalidPath, Schema, normalize_path, path_segments
from .events import HTTP, WARMING, Event, Response

Handler = Callable[..., object]
Interceptor = Callable[[Event], Response | None]
Converter = Callable[[str], object]

INT32_MIN, INT32_MAX = -(2**31), 2**31 - 1
INT64_MIN, INT64_MAX = -(2**63), 2**63 - 1
FLOAT32_MAX = 3.4028234663852886e38

_INT_RE = re.compile(r"^[+-]?[0-9]+$")
# Decimal or scientific notation only: no inf/nan spellings, no whitespace,
# no underscores (all of which the host float() would otherwise accept).
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class DispatchError(Exception):
    pass


class UnresolvedHandler(DispatchError):
    def __init__(self, names: list[str]):
        super().__init__(f"no handler registered for: {', '.join(names)}")
        self.names = names


class MissingParam(DispatchError):
    def __init__(self, name: str):
        super().__init__(f"missing parameter {name!r}")
        self.name = name


class TypeMismatch(DispatchError):
    def __init__(self, name: str, type_name: str, raw: str):
        super().__init__(f"parameter {name!r}: {raw!r} is not a valid {type_name}")
        self.name = name
        self.type_name = type_name
        self.raw = raw


@dataclass(frozen=True)
class HandlerEntry:
    route: DynamicRoute
    func: Handler
    segments: tuple[str, ...] = ()
    literal_count: int = 0


@dataclass(frozen=True)
class StaticEntry:
    path: str
    source_file: str
    content_type: str


class _Once:
    """Runs a list of hooks exactly once, even from concurrent callers."""

    def __init__(self, hooks: tuple[Callable[[], None], ...]):
        self._hooks = hooks
        self._lock = threading.Lock()
        self._done = False

    def run(self) -> None:
        if self._done:
            return
        with self._lock:
            if self._done:
                return
            for hook in self._hooks:
                hook()
            self._done = True


@dataclass(frozen=True)
class DispatchTable:
    exact: dict[tuple[str, str], HandlerEntry]
    parameterized: tuple[HandlerEntry, ...]
    statics: dict[str, StaticEntry]
    interceptors: tuple[Interceptor, ...] = ()
    converters: dict[str, Converter] = field(default_factory=dict)
    warming_hooks: tuple[Callable[[], None], ...] = ()
    static_root: Path | None = None
    init_once: _Once = field(default_factory=lambda: _Once(()))


def load_dispatch_table(
    schema: Schema,
    handlers: Mapping[str, Handler],
    *,
    interceptors: Iterable[Interceptor] = (),
    converters: Mapping[str, Converter] | None = None,
    init_hooks: Iterable[Callable[[], None]] = (),
    warming_hooks: Iterable[Callable[[], None]] = (),
    static_root: str | Path | None = None,
) -> DispatchTable:
    """Populate a dispatch table, binding every dynamic route to a handler."""
    missing = sorted({r.handler_name for r in schema.dynamic_routes} - set(handlers))
    if missing:
        raise UnresolvedHandler(missing)

    exact: dict[tuple[str, str], HandlerEntry] = {}
    parameterized: list[HandlerEntry] = []
    for route in schema.dynamic_routes:
        segments = path_segments(route.path)
        entry = HandlerEntry(
            route=route,
            func=handlers[route.handler_name],
            segments=segments,
            literal_count=sum(1 for s in segments if not s.startswith("{")),
        )
        if any(s.startswith("{") for s in segments):
            parameterized.append(entry)
        else:
            exact[(route.method, route.path)] = entry

    statics = {
        r.path: StaticEntry(path=r.path, source_file=r.source_file, content_type=r.mime.value)
        for r in schema.static_routes
    }
    return DispatchTable(
        exact=exact,
        parameterized=tuple(parameterized),
        statics=statics,
        interceptors=tuple(interceptors),
        converters=dict(converters or {}),
        warming_hooks=tuple(warming_hooks),
        static_root=Path(static_root) if static_root is not None else None,
        init_once=_Once(tuple(init_hooks)),
    )


def match_route(
    table: DispatchTable, method: str, path: str
) -> tuple[HandlerEntry, dict[str, str]] | StaticEntry | None:
    """Resolve a request to a handler entry plus path parameters.

    Returns a StaticEntry for static hits and None when nothing matches.
    """
    entry = table.exact.get((method, path))
    if entry is not None:
        return entry, {}

    segments = path_segments(path)
    best: tuple[int, str] | None = None
    best_match: tuple[HandlerEntry, dict[str, str]] | None = None
    for candidate in table.parameterized:
        if candidate.route.method != method or len(candidate.segments) != len(segments):
            continue
        params: dict[str, str] = {}
        for pattern, actual in zip(candidate.segments, segments):
            if pattern.startswith("{"):
                params[pattern[1:-1]] = actual
            elif pattern != actual:
                break
        else:
            rank = (-candidate.literal_count, candidate.route.path)
            if best is None or rank < best:
                best = rank
                best_match = (candidate, params)
    if best_match is not None:
        return best_match

    if method == "GET":
        static = table.statics.get(path)
        if static is not None:
            return static
    return None


def deserialize_params(
    sig: Iterable[tuple[str, str]],
    raw: Mapping[str, str],
    converters: Mapping[str, Converter] | None = None,
) -> list[object]:
    """Parse raw string values into the declared parameter types, in order.

    Boolean accepts exactly "true"/"false" (case-sensitive); integers are
    decimal with 32/64-bit range checks; floats are decimal or scientific
    notation. Non-primitive type names are delegated to registered
    converter hooks.
    """
    converters = converters or {}
    values: list[object] = []
    for name, type_name in sig:
        if name not in raw:
            raise MissingParam(name)
        text = raw[name]
        values.append(_parse_value(name, type_name, text, converters))
    return values


def _parse_value(
    name: str, type_name: str, text: str, converters: Mapping[str, Converter]
) -> object:
    if type_name == "String":
        return text
    if type_name == "Boolean":
        if text == "true":
            return True
        if text == "false":
            return False
        raise TypeMismatch(name, type_name, text)
    if type_name in ("Int", "Long"):
        if not _INT_RE.match(text):
            raise TypeMismatch(name, type_name, text)
        value = int(text)
        low, high = (INT32_MIN, INT32_MAX) if type_name == "Int" else (INT64_MIN, INT64_MAX)
        if not low <= value <= high:
            raise TypeMismatch(name, type_name, text)
        return value
    if type_name in ("Float", "Double"):
        if not _FLOAT_RE.match(text):
            raise TypeMismatch(name, type_name, text)
        value = float(text)
        if value in (float("inf"), float("-inf")):
            raise TypeMismatch(name, type_name, text)
        if type_name == "Float" and abs(value) > FLOAT32_MAX:
            raise TypeMismatch(name, type_name, text)
        return value
    converter = converters.get(type_name)
    if converter is None:
        raise TypeMismatch(name, type_name, text)
    try:
        return converter(text)
    except Exception:
        raise TypeMismatch(name, type_name, text) from None


def serialize_result(value: object) -> Response:
    """Encode a handler's return value as an HTTP response.

    None (Unit) -> 204 empty; strings -> 200 text/plain; booleans and
    numbers -> 200 text/plain decimal rendering.
    """
    if value is None:
        return Response.no_content()
    if isinstance(value, str):
        return Response.text(200, value)
    if isinstance(value, bool):
        return Response.text(200, "true" if value else "false")
    if isinstance(value, int):
        return Response.text(200, str(value))
    if isinstance(value, float):
        return Response.text(200, repr(value))
    return Response.text(200, str(value))


def handle_event(event: Event, table: DispatchTable) -> Response:
    """Serve one event; every failure is encoded as a Response."""
    table.init_once.run()

    if event.type == WARMING:
        for hook in table.warming_hooks:
            hook()
        return Response.text(200, "warm")
    if event.type != HTTP:
        return Response.text(400, f"unknown event type {event.type!r}")

    for interceptor in table.interceptors:
        short_circuit = interceptor(event)
        if short_circuit is not None:
            return short_circuit

    try:
        path = normalize_path(event.path)
    except InvalidPath:
        return Response.text(404, f"not found: {event.method} {event.path}")

    match = match_route(table, event.method, path)
    if match is None:
        return Response.text(404, f"not found: {event.method} {path}")
    if isinstance(match, StaticEntry):
        return _serve_static(table, match)

    entry, path_params = match
    raw = dict(event.query)
    raw.update(path_params)
    try:
        values = deserialize_params(entry.route.params, raw, table.converters)
    except (MissingParam, TypeMismatch) as err:
        return Response.text(400, str(err))
    kwargs = {name: value for (name, _), value in zip(entry.route.params, values)}
    try:
        result = entry.func(**kwargs)
    except Exception as err:  # handler failures become 500s, never crashes
        return Response.text(500, f"handler error: {err}")
    return serialize_result(result)


def _serve_static(table: DispatchTable, entry: StaticEntry) -> Response:
    root = table.static_root if table.static_root is not None else Path(".")
    target = root / entry.source_file
    try:
        body = target.read_text(encoding="utf-8", errors="replace")
    except OSError:
        return Response.text(404, f"static file not found: {entry.source_file}")
    return Response(status=200, headers={"Content-Type": entry.content_type}, body=body)
