"""Modality-aware routing proxy.

The router sits between the orchestrator and the agents as an HTTP JSON-RPC
service. Each request names its destination agent in the `X-A2A-Destination`
header (and its priority in `X-A2A-Priority`); the router looks up the
destination's card through the TTL registry, rewrites each message part per
the active routing mode, records one telemetry row per part, and forwards the
rewritten request. It also serves transcoded-away oversize payloads from a
content-addressed blob store at `/blob/<digest>`.
"""

from __future__ import annotations

import json
import logging
import threading
from typing import Iterator, Optional
from urllib.parse import parse_qs, urlparse

from .httpd import (
    JsonReply,
    RpcReply,
    ServerHandle,
    SseReply,
    TransportCallError,
    fetch_bytes,
    post_rpc,
    start_server,
    stream_rpc,
)
from .protocol import (
    RPC_INVALID_PARAMS,
    RPC_SERVER_ERROR,
    METHOD_GET,
    METHOD_SEND,
    METHOD_SEND_SUBSCRIBE,
    FilePart,
    Message,
    RpcRequest,
    rpc_error,
    rpc_result,
)
from .registry import CardFetchError, CardRegistry
from .routing import (
    BlobStore,
    RoutingConfigError,
    RoutingDecision,
    RoutingMode,
    TelemetryLog,
    externalize_oversize_parts,
    route_message,
)

log = logging.getLogger(__name__)

DESTINATION_HEADER = "x-a2a-destination"
PRIORITY_HEADER = "x-a2a-priority"


class RouterService:
    """JSON-RPC proxy application implementing the routing layer."""

    def __init__(self, registry: CardRegistry, mode: RoutingMode = RoutingMode.NATIVE,
                 theta: Optional[float] = None,
                 blob_store: Optional[BlobStore] = None,
                 telemetry: Optional[TelemetryLog] = None):
        self.registry = registry
        self.mode = mode
        self.theta = theta
        self.blob_store = blob_store
        self.telemetry = telemetry
        self.base_url = ""
        self._decisions: list[RoutingDecision] = []
        self._lock = threading.Lock()

    # -- arm configuration ---------------------------------------------------

    def configure(self, mode: RoutingMode, theta: Optional[float] = None,
                  telemetry: Optional[TelemetryLog] = None) -> None:
        self.mode = RoutingMode(mode)
        self.theta = theta
        self.telemetry = telemetry

    def reset_decisions(self) -> None:
        with self._lock:
            self._decisions.clear()

    def decisions(self, task_prefix: Optional[str] = None) -> list[RoutingDecision]:
        with self._lock:
            snapshot = list(self._decisions)
        if task_prefix is None:
            return snapshot
        return [d for d in snapshot if d.task_id.startswith(task_prefix)]

    # -- HTTP surface ----------------------------------------------------------

    def handle_get(self, path: str):
        parsed = urlparse(path)
        if parsed.path.startswith("/blob/"):
            if self.blob_store is None:
                return 404, "text/plain", b"no blob store configured"
            digest = parsed.path[len("/blob/"):]
            if not self.blob_store.has(digest):
                return 404, "text/plain", b"unknown blob"
            return 200, "application/octet-stream", self.blob_store.get(digest)
        if parsed.path == "/telemetry":
            prefix = parse_qs(parsed.query).get("task_prefix", [None])[0]
            rows = [d.to_wire() for d in self.decisions(prefix)]
            return 200, "application/json", json.dumps(rows).encode("utf-8")
        return None

    def handle_rpc(self, request: RpcRequest, headers: dict) -> RpcReply:
        lowered = {k.lower(): v for k, v in headers.items()}
        destination = lowered.get(DESTINATION_HEADER)
        if not destination:
            return JsonReply(rpc_error(
                request.id, RPC_INVALID_PARAMS,
                f"missing {DESTINATION_HEADER} header naming the target agent"))
        if request.method == METHOD_GET:
            return self._forward_json(destination, request, request.params)

        try:
            priority = int(lowered.get(PRIORITY_HEADER, "0"))
        except ValueError:
            return JsonReply(rpc_error(request.id, RPC_INVALID_PARAMS,
                                       f"non-integer {PRIORITY_HEADER} header"))
        try:
            message = Message.from_wire(request.params["message"])
        except (KeyError, TypeError, ValueError) as exc:
            return JsonReply(rpc_error(request.id, RPC_INVALID_PARAMS,
                                       f"bad message params: {exc}"))
        metadata = request.params.get("metadata") or {}
        task_id = str(metadata.get("benchmark_task_id") or message.message_id)

        try:
            capabilities = self.registry.get_capabilities(destination)
        except CardFetchError as exc:
            return JsonReply(rpc_error(request.id, RPC_SERVER_ERROR,
                                       f"agent-unreachable: {destination}: {exc}"))
        try:
            routed, decisions = route_message(
                message, capabilities, self.mode, task_id=task_id,
                destination=destination, theta=self.theta, priority=priority,
                resolver=self._resolve_payload,
            )
        except RoutingConfigError as exc:
            return JsonReply(rpc_error(request.id, RPC_INVALID_PARAMS, str(exc)))
        if self.blob_store is not None and self.base_url:
            routed = externalize_oversize_parts(routed, self.blob_store, self.base_url)
        self._record(decisions)

        forward_params = dict(request.params)
        forward_params["message"] = routed.to_wire()
        if request.method == METHOD_SEND:
            return self._forward_json(destination, request, forward_params)
        return SseReply(self._forward_stream(destination, request, forward_params))

    # -- internals ------------------------------------------------------

    def _record(self, decisions: list[RoutingDecision]) -> None:
        with self._lock:
            self._decisions.extend(decisions)
        if self.telemetry is not None:
            for decision in decisions:
                self.telemetry.append(decision)

    def _resolve_payload(self, part: FilePart) -> bytes:
        if part.data is not None:
            return part.data
        assert part.uri is not None
        marker = "/blob/"
        if self.blob_store is not None and marker in part.uri:
            digest = part.uri.rsplit(marker, 1)[1]
            if self.blob_store.has(digest):
                return self.blob_store.get(digest)
        return fetch_bytes(part.uri)

    def _forward_json(self, destination: str, request: RpcRequest,
                      params: dict) -> JsonReply:
        try:
            response = post_rpc(destination, request.method, params,
                                request_id=request.id)
        except TransportCallError as exc:
            return JsonReply(rpc_error(request.id, RPC_SERVER_ERROR,
                                       f"forwarding to {destination} failed: {exc}"))
        if response.error is not None:
            return JsonReply({"jsonrpc": "2.0", "id": request.id,
                              "error": response.error})
        return JsonReply(rpc_result(request.id, response.result))

    def _forward_stream(self, destination: str, request: RpcRequest,
                        params: dict) -> Iterator[dict]:
        yield from stream_rpc(destination, request.method, params,
                              request_id=request.id)


def serve_router(registry: CardRegistry, mode: RoutingMode = RoutingMode.NATIVE,
                 theta: Optional[float] = None,
                 blob_store: Optional[BlobStore] = None,
                 telemetry: Optional[TelemetryLog] = None,
                 host: str = "127.0.0.1", port: int = 0) -> tuple[ServerHandle, RouterService]:
    service = RouterService(registry, mode=mode, theta=theta,
                            blob_store=blob_store, telemetry=telemetry)
    handle = start_server(service, host=host, port=port)
    service.base_url = handle.url
    log.info("router serving at %s (mode=%s)", handle.url, service.mode.value)
    return handle, service
