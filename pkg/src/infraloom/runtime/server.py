"""Local HTTP emulator and newline-delimited JSON batch mode.

The server speaks plain HTTP/1.1 on a configurable localhost port and
serves concurrent requests against an immutable dispatch table. Batch mode
reads one JSON event per line and writes one JSON response per line.
"""

from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Iterable, Iterator
from urllib.parse import parse_qs, urlsplit

from .dispatch import DispatchTable, handle_event
from .events import Event, EventDecodeError, Response, event_from_json, response_to_json


def _make_handler(table: DispatchTable):
    class _Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, format, *args):  # keep test output quiet
            pass

        def _serve(self, method: str) -> None:
            split = urlsplit(self.path)
            query = {
                key: values[0]
                for key, values in parse_qs(split.query, keep_blank_values=True).items()
            }
            body: str | None = None
            length = int(self.headers.get("Content-Length", 0) or 0)
            if length:
                body = self.rfile.read(length).decode("utf-8", errors="replace")
            event = Event.http(
                method=method,
                path=split.path,
                query=query,
                headers={k: v for k, v in self.headers.items()},
                body=body,
            )
            response = handle_event(event, table)
            payload = response.body.encode("utf-8")
            self.send_response(response.status)
            for key, value in response.headers.items():
                self.send_header(key, value)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            if payload:
                self.wfile.write(payload)

        def do_GET(self):
            self._serve("GET")

        def do_POST(self):
            self._serve("POST")

    return _Handler


class EmulatorServer:
    """Threaded HTTP server bound to localhost; port 0 picks a free port."""

    def __init__(self, table: DispatchTable, host: str = "127.0.0.1", port: int = 0):
        self._server = ThreadingHTTPServer((host, port), _make_handler(table))
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "EmulatorServer":
        self.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()


def process_event_lines(table: DispatchTable, lines: Iterable[str]) -> Iterator[str]:
    """Batch mode: one JSON event per input line, one JSON response out."""
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            event = event_from_json(line)
        except EventDecodeError as err:
            yield response_to_json(Response.text(400, str(err)))
            continue
        yield response_to_json(handle_event(event, table))
