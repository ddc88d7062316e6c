"""Event and response model shared by the HTTP emulator and batch mode.

Wire format (newline-delimited JSON), one event or response per line:

    {"type":"http","method":"GET","path":"/","query":{},"headers":{},"body":null}
    {"type":"warming","sequence":0}
    {"status":200,"headers":{"Content-Type":"text/plain"},"body":"Hello world!"}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

HTTP = "http"
WARMING = "warming"


class EventDecodeError(Exception):
    pass


@dataclass(frozen=True)
class Event:
    type: str
    method: str = ""
    path: str = ""
    query: dict[str, str] = field(default_factory=dict)
    headers: dict[str, str] = field(default_factory=dict)
    body: str | None = None
    sequence: int = 0

    @staticmethod
    def http(method: str, path: str, query: dict[str, str] | None = None,
             headers: dict[str, str] | None = None, body: str | None = None) -> "Event":
        return Event(type=HTTP, method=method, path=path,
                     query=dict(query or {}), headers=dict(headers or {}), body=body)

    @staticmethod
    def warming(sequence: int = 0) -> "Event":
        return Event(type=WARMING, sequence=sequence)


@dataclass(frozen=True)
class Response:
    status: int
    headers: dict[str, str] = field(default_factory=dict)
    body: str = ""

    @staticmethod
    def text(status: int, body: str) -> "Response":
        return Response(status=status, headers={"Content-Type": "text/plain"}, body=body)

    @staticmethod
    def no_content() -> "Response":
        return Response(status=204)


def event_to_json(event: Event) -> str:
    if event.type == WARMING:
        return json.dumps({"type": WARMING, "sequence": event.sequence})
    return json.dumps(
        {
            "type": HTTP,
            "method": event.method,
            "path": event.path,
            "query": event.query,
            "headers": event.headers,
            "body": event.body,
        }
    )


def event_from_json(line: str) -> Event:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as err:
        raise EventDecodeError(f"malformed event JSON: {err}") from None
    if not isinstance(data, dict) or "type" not in data:
        raise EventDecodeError("event must be a JSON object with a 'type' field")
    if data["type"] == WARMING:
        return Event.warming(sequence=int(data.get("sequence", 0)))
    if data["type"] == HTTP:
        return Event.http(
            method=str(data.get("method", "GET")),
            path=str(data.get("path", "/")),
            query={str(k): str(v) for k, v in (data.get("query") or {}).items()},
            headers={str(k): str(v) for k, v in (data.get("headers") or {}).items()},
            body=data.get("body"),
        )
    raise EventDecodeError(f"unknown event type {data['type']!r}")


def response_to_json(response: Response) -> str:
    return json.dumps(
        {"status": response.status, "headers": response.headers, "body": response.body}
    )


def response_from_json(line: str) -> Response:
    data = json.loads(line)
    return Response(
        status=int(data["status"]),
        headers={str(k): str(v) for k, v in (data.get("headers") or {}).items()},
        body=data.get("body") or "",
    )
