"""Threaded HTTP plumbing shared by the agents and the router.

Every service in the mesh speaks the same dialect: GET for the well-known
agent card (and router blob reads), POST / for JSON-RPC. A handler app
returns either a JSON reply or an SSE reply; SSE responses are written
frame-by-frame and close-delimited.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable, Iterator, Optional

import httpx

from .protocol import (
    RpcEnvelopeError,
    RpcRequest,
    RpcResponse,
    RPC_INVALID_REQUEST,
    RPC_PARSE_ERROR,
    SseAssembler,
    rpc_error,
    sse_frame,
)


class BindError(OSError):
    pass


class TransportCallError(RuntimeError):
    """The far side failed at the HTTP layer (not a JSON-RPC error reply)."""


@dataclass
class JsonReply:
    payload: dict


@dataclass
class SseReply:
    events: Iterator[dict]


RpcReply = Any  # JsonReply | SseReply


class RpcApp:
    """Interface the HTTP handler dispatches into."""

    def handle_get(self, path: str) -> Optional[tuple[int, str, bytes]]:
        return None

    def handle_rpc(self, request: RpcRequest, headers: dict[str, str]) -> RpcReply:
        raise NotImplementedError


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    # Small JSON-RPC bodies over keep-alive stall ~40ms/request under Nagle +
    # delayed ACK; the mesh chains two hops per call, so this matters.
    disable_nagle_algorithm = True

    def log_message(self, format: str, *args: Any) -> None:  # noqa: A002
        pass  # mesh services are chatty; tests read telemetry, not access logs

    @property
    def app(self) -> RpcApp:
        return self.server.app  # type: ignore[attr-defined]

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        found = self.app.handle_get(self.path)
        if found is None:
            self.send_response(404)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        status, content_type, body = found
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self) -> None:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        try:
            wire = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._send_json(200, rpc_error(None, RPC_PARSE_ERROR, f"parse error: {exc}"))
            return
        try:
            request = RpcRequest.from_wire(wire)
        except RpcEnvelopeError as exc:
            self._send_json(200, rpc_error(wire.get("id"), RPC_INVALID_REQUEST, str(exc)))
            return
        headers = {k.lower(): v for k, v in self.headers.items()}
        reply = self.app.handle_rpc(request, headers)
        if isinstance(reply, JsonReply):
            self._send_json(200, reply.payload)
            return
        assert isinstance(reply, SseReply)
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Connection", "close")
        self.end_headers()
        for event in reply.events:
            self.wfile.write(sse_frame(event))
            self.wfile.flush()
        self.close_connection = True


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], app: RpcApp):
        super().__init__(address, _Handler)
        self.app = app


class ServerHandle:
    def __init__(self, server: _Server, thread: threading.Thread):
        self._server = server
        self._thread = thread

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        host = self._server.server_address[0]
        return f"http://{host}:{self.port}"

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)


def start_server(app: RpcApp, host: str = "127.0.0.1", port: int = 0) -> ServerHandle:
    """Bind and serve in a daemon thread. port=0 picks an ephemeral port."""
    try:
        server = _Server((host, port), app)
    except OSError as exc:
        raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return ServerHandle(server, thread)


# --- client side ---------------------------------------------------------------

_client_lock = threading.Lock()
_client: Optional[httpx.Client] = None


def shared_client() -> httpx.Client:
    """Process-wide pooled client; connection reuse keeps intra-mesh hops fast."""
    global _client
    with _client_lock:
        if _client is None:
            _client = httpx.Client()
        return _client

def post_rpc(
    url: str,
    method: str,
    params: dict,
    request_id: Optional[str] = None,
    headers: Optional[dict[str, str]] = None,
    timeout: float = 30.0,
) -> RpcResponse:
    request = RpcRequest(method=method, params=params, id=request_id)
    try:
        response = shared_client().post(
            url, json=request.to_wire(), headers=headers, timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportCallError(f"POST {url} failed: {exc}") from exc
    if response.status_code != 200:
        raise TransportCallError(f"POST {url} returned HTTP {response.status_code}")
    return RpcResponse.from_wire(response.json())


def stream_rpc(
    url: str,
    method: str,
    params: dict,
    request_id: Optional[str] = None,
    headers: Optional[dict[str, str]] = None,
    timeout: float = 60.0,
) -> Iterator[dict]:
    """POST a subscribe call and yield SSE event payloads as they arrive."""
    request = RpcRequest(method=method, params=params, id=request_id)
    assembler = SseAssembler()
    try:
        with shared_client().stream(
            "POST", url, json=request.to_wire(), headers=headers, timeout=timeout
        ) as response:
            if response.status_code != 200:
                raise TransportCallError(f"POST {url} returned HTTP {response.status_code}")
            for chunk in response.iter_bytes():
                yield from assembler.feed(chunk)
    except httpx.HTTPError as exc:
        raise TransportCallError(f"streaming POST {url} failed: {exc}") from exc
    assembler.close()


def fetch_bytes(url: str, timeout: float = 30.0) -> bytes:
    try:
        response = shared_client().get(url, timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportCallError(f"GET {url} failed: {exc}") from exc
    if response.status_code != 200:
        raise TransportCallError(f"GET {url} returned HTTP {response.status_code}")
    return response.content
