"""Local mesh assembly: the three agents plus the router on loopback ports."""

from __future__ import annotations

import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .agents import (
    AGENT_KINDS,
    AgentService,
    AgentSpec,
    KeywordBackend,
    LlmClientBackend,
    ReasoningBackend,
    ScriptedBackend,
    serve_agent,
)
from .benchmark import Manifest
from .httpd import ServerHandle
from .registry import CardRegistry
from .router import RouterService, serve_router
from .routing import BlobStore, RoutingMode, TelemetryLog

log = logging.getLogger(__name__)

BACKEND_NAMES = ("keyword", "scripted", "llm")

LLM_ENDPOINT_VAR = "MODALMESH_LLM_ENDPOINT"
LLM_API_KEY_VAR = "MODALMESH_LLM_API_KEY"


def make_backend(name: str, manifest: Manifest) -> ReasoningBackend:
    if name == "keyword":
        return KeywordBackend(manifest.keyword_rules, manifest)
    if name == "scripted":
        return ScriptedBackend(manifest)
    if name == "llm":
        endpoint = os.environ.get(LLM_ENDPOINT_VAR)
        if not endpoint:
            raise ValueError(
                f"llm backend needs the {LLM_ENDPOINT_VAR} environment variable")
        return LlmClientBackend(endpoint, api_key=os.environ.get(LLM_API_KEY_VAR),
                                manifest=manifest)
    raise ValueError(f"unknown backend {name!r}; pick one of {BACKEND_NAMES}")


@dataclass
class Mesh:
    """Handles and services of one running mesh instance."""

    manifest: Manifest
    registry: CardRegistry
    blob_store: BlobStore
    router_handle: ServerHandle
    router_service: RouterService
    agent_handles: dict[str, ServerHandle]
    agent_services: dict[str, AgentService]
    _owned_blob_dir: Optional[str] = None
    _down: bool = field(default=False, init=False)

    @property
    def router_url(self) -> str:
        return self.router_handle.url

    @property
    def agent_urls(self) -> dict[str, str]:
        return {kind: handle.url for kind, handle in self.agent_handles.items()}

    def set_backend(self, backend: ReasoningBackend) -> None:
        for service in self.agent_services.values():
            service.spec.backend = backend

    def set_delays(self, profile: Optional[dict]) -> None:
        for service in self.agent_services.values():
            service.delay_profile = profile or {}

    def configure_arm(self, mode: RoutingMode, theta: Optional[float] = None,
                      telemetry: Optional[TelemetryLog] = None) -> None:
        self.router_service.configure(mode, theta=theta, telemetry=telemetry)
        self.router_service.reset_decisions()

    def shutdown(self) -> None:
        if self._down:
            return
        self._down = True
        self.router_handle.shutdown()
        for handle in self.agent_handles.values():
            handle.shutdown()
        if self._owned_blob_dir:
            shutil.rmtree(self._owned_blob_dir, ignore_errors=True)

    def __enter__(self) -> "Mesh":
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()


def start_mesh(manifest: Manifest, backend: str = "scripted",
               mode: RoutingMode = RoutingMode.NATIVE,
               theta: Optional[float] = None,
               delay_profile: Optional[dict] = None,
               host: str = "127.0.0.1",
               ports: Optional[dict[str, int]] = None,
               blob_dir: Optional[Path] = None,
               registry_ttl: Optional[float] = None) -> Mesh:
    """Bring up three agents and the router; returns a live Mesh."""
    ports = ports or {}
    shared_backend = make_backend(backend, manifest)

    agent_handles: dict[str, ServerHandle] = {}
    agent_services: dict[str, AgentService] = {}
    started: list[ServerHandle] = []
    owned_dir: Optional[str] = None
    try:
        for kind in AGENT_KINDS:
            handle, service = serve_agent(
                AgentSpec(kind=kind, backend=shared_backend),
                host=host, port=ports.get(kind, 0),
                manifest=manifest, delay_profile=delay_profile,
            )
            agent_handles[kind] = handle
            agent_services[kind] = service
            started.append(handle)

        if blob_dir is None:
            owned_dir = tempfile.mkdtemp(prefix="modalmesh-blobs-")
            blob_path = Path(owned_dir)
        else:
            blob_path = Path(blob_dir)
        store = BlobStore(blob_path)

        registry_kwargs = {} if registry_ttl is None else {"ttl_seconds": registry_ttl}
        registry = CardRegistry(**registry_kwargs)
        router_handle, router_service = serve_router(
            registry, mode=mode, theta=theta, blob_store=store,
            host=host, port=ports.get("router", 0),
        )
        started.append(router_handle)
    except Exception:
        for handle in started:
            handle.shutdown()
        if owned_dir:
            shutil.rmtree(owned_dir, ignore_errors=True)
        raise

    log.info("mesh up: router=%s agents=%s", router_handle.url,
             {k: h.url for k, h in agent_handles.items()})
    return Mesh(
        manifest=manifest,
        registry=registry,
        blob_store=store,
        router_handle=router_handle,
        router_service=router_service,
        agent_handles=agent_handles,
        agent_services=agent_services,
        _owned_blob_dir=owned_dir,
    )
