"""The three mesh agents: voice and vision analyzers plus the text synthesizer.

Each agent is an HTTP JSON-RPC service publishing an agent card and running a
pluggable reasoning backend. Analysis agents turn delivered parts into one
evidence record; the text agent parses evidence records back out of text parts
and asks its backend for a final action decision.

Evidence travels between agents as text parts in a fixed line format:

    evidence source=<source> channel=<voice|image|text> fidelity=<native|transcoded>
    <summary, possibly several lines>

Multiple records in one part are separated by a line containing `===`. The
`structured` details of an evidence record are local only and do not survive
the wire format.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import httpx

from . import media
from .benchmark import (
    ACTIONS,
    FID_NATIVE,
    FID_TRANSCODED,
    BenchmarkTask,
    KeywordRules,
    KnowledgeBase,
    Manifest,
    profile_key,
)
from .httpd import JsonReply, RpcReply, ServerHandle, SseReply, fetch_bytes, start_server
from .protocol import (
    RPC_INVALID_PARAMS,
    RPC_SERVER_ERROR,
    RPC_UNSUPPORTED_PART,
    METHOD_GET,
    METHOD_SEND,
    METHOD_SEND_SUBSCRIBE,
    AgentCard,
    Artifact,
    DataPart,
    FilePart,
    Message,
    RpcRequest,
    Skill,
    TaskRecord,
    TaskState,
    TextPart,
    encode_card,
    rpc_error,
    rpc_result,
)
from .registry import WELL_KNOWN_PATH
from .routing import FIDELITY_MARKER, IMAGE_CAPTION

log = logging.getLogger(__name__)

VOICE_KIND = "voice"
VISION_KIND = "vision"
TEXT_KIND = "text"
AGENT_KINDS = (VOICE_KIND, VISION_KIND, TEXT_KIND)

_EVIDENCE_SEPARATOR = "\n===\n"
_EVIDENCE_HEADER = re.compile(
    r"^evidence source=(?P<source>\S+) channel=(?P<channel>voice|image|text) "
    r"fidelity=(?P<fidelity>native|transcoded)$"
)

RULE_CONFIDENCE = 0.7
FALLBACK_CONFIDENCE = 0.3


class BackendError(RuntimeError):
    pass


@dataclass
class Evidence:
    """One agent's contribution to a task: a summary plus fidelity provenance."""

    source: str
    channel: str
    fidelity: str
    summary: str
    structured: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.channel not in ("voice", "image", "text"):
            raise ValueError(f"bad evidence channel {self.channel!r}")
        if self.fidelity not in (FID_NATIVE, FID_TRANSCODED):
            raise ValueError(f"bad evidence fidelity {self.fidelity!r}")


def encode_evidence(records: Sequence[Evidence]) -> str:
    blocks = []
    for record in records:
        if _EVIDENCE_SEPARATOR in record.summary:
            raise ValueError("evidence summary may not contain the record separator")
        blocks.append(
            f"evidence source={record.source} channel={record.channel} "
            f"fidelity={record.fidelity}\n{record.summary}"
        )
    return _EVIDENCE_SEPARATOR.join(blocks)


def decode_evidence(text: str) -> list[Evidence]:
    records = []
    for block in text.split(_EVIDENCE_SEPARATOR):
        header, _, summary = block.partition("\n")
        matched = _EVIDENCE_HEADER.match(header)
        if matched is None:
            raise ValueError(f"malformed evidence header: {header!r}")
        records.append(Evidence(summary=summary, **matched.groupdict()))
    return records


def is_evidence_text(text: str) -> bool:
    return _EVIDENCE_HEADER.match(text.partition("\n")[0]) is not None


@dataclass(frozen=True)
class ActionDecision:
    action: str
    confidence: float
    rationale: str

    def __post_init__(self) -> None:
        if self.action not in ACTIONS:
            raise ValueError(f"action {self.action!r} outside the label set")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def to_payload(self) -> dict:
        return {"action": self.action, "confidence": self.confidence,
                "rationale": self.rationale}

    @classmethod
    def from_payload(cls, payload: dict) -> "ActionDecision":
        return cls(action=payload["action"], confidence=float(payload["confidence"]),
                   rationale=str(payload.get("rationale", "")))


def build_agent_card(kind: str, url: str) -> AgentCard:
    if kind == VOICE_KIND:
        skills = [Skill(
            id="voice-analysis",
            input_modes=["audio/wav", "audio/webm"],
            output_modes=["text/plain"],
            description="Transcription plus sentiment and urgency read-out of "
                        "customer voice clips.",
        )]
        name = "voice-agent"
    elif kind == VISION_KIND:
        skills = [Skill(
            id="visual-inspection",
            input_modes=["image/png", "image/jpeg"],
            output_modes=["text/plain"],
            description="Visual inspection and defect detection on customer photos.",
        )]
        name = "vision-agent"
    elif kind == TEXT_KIND:
        skills = [Skill(
            id="decision-synthesis",
            input_modes=["text/plain"],
            output_modes=["application/json", "text/plain"],
            description="Evidence synthesis against the product knowledge base, "
                        "producing one of the eight support actions.",
        )]
        name = "text-agent"
    else:
        raise ValueError(f"unknown agent kind {kind!r}")
    return AgentCard(name=name, url=url, skills=skills,
                     description=f"{name} of the support mesh")


@dataclass
class AnalysisInput:
    """What an analysis backend actually consumes, extracted from raw parts."""

    kind: str
    fidelity: str
    media_texts: list[str]
    context_notes: list[str]
    instruction: str
    task: Optional[BenchmarkTask]


def matched_keywords(text: str, vocabulary: frozenset[str]) -> set[str]:
    """Case-insensitive whole-word keyword hits; plural forms do not match."""
    return {w for w in re.findall(r"[a-z0-9']+", text.lower()) if w in vocabulary}


class ReasoningBackend:
    """Pluggable analysis/decision pair shared by all three agents.

    `analyze` is common to every backend: with manifest fixtures available it
    returns the task's authored native-grade or transcoded-grade summary for
    the agent's channel, otherwise it degrades to echoing the extracted media
    text. Subclasses supply `decide`, which is where the two experiment arms
    actually differ.
    """

    name = "base"

    def __init__(self, manifest: Optional[Manifest] = None):
        self.manifest = manifest

    def analyze(self, inp: AnalysisInput) -> Evidence:
        channel = "voice" if inp.kind == VOICE_KIND else "image"
        summary = None
        if inp.task is not None:
            fixture = (inp.task.fixtures.voice_summary if inp.kind == VOICE_KIND
                       else inp.task.fixtures.vision_summary)
            if fixture is not None:
                summary = fixture[inp.fidelity]
        if summary is None:
            body = " / ".join(inp.media_texts) if inp.media_texts else "no media text"
            verb = "heard" if inp.kind == VOICE_KIND else "saw"
            summary = f"{verb} ({inp.fidelity}): {body}"
        return Evidence(
            source=f"{inp.kind}-agent",
            channel=channel,
            fidelity=inp.fidelity,
            summary=summary,
            structured={"media_texts": len(inp.media_texts),
                        "context_notes": len(inp.context_notes)},
        )

    def decide(self, task: Optional[BenchmarkTask], evidence: list[Evidence],
               kb: Optional[KnowledgeBase], kb_refs: Sequence[str] = ()) -> ActionDecision:
        raise NotImplementedError


class KeywordBackend(ReasoningBackend):
    """Ordered-rule keyword matcher; blind to evidence fidelity by construction."""

    name = "keyword"

    def __init__(self, rules: KeywordRules, manifest: Optional[Manifest] = None):
        super().__init__(manifest)
        self.rules = rules

    def decide_from_keywords(self, matched: frozenset[str]) -> ActionDecision:
        # Pure function of the matched set: order and duplication never matter.
        for rule in self.rules.rules:
            if rule.keywords <= matched:
                hit = ", ".join(sorted(rule.keywords))
                return ActionDecision(
                    action=rule.action,
                    confidence=RULE_CONFIDENCE,
                    rationale=f"rule [{hit}] fired",
                )
        return ActionDecision(
            action=self.rules.fallback_action,
            confidence=FALLBACK_CONFIDENCE,
            rationale=f"no rule fired over matched keywords {sorted(matched)}",
        )

    def decide(self, task, evidence, kb, kb_refs=()):
        matched: set[str] = set()
        for record in evidence:
            matched |= matched_keywords(record.summary, self.rules.vocabulary)
        return self.decide_from_keywords(frozenset(matched))


class ScriptedBackend(ReasoningBackend):
    """Replays authored decisions keyed by (task, evidence fidelity profile)."""

    name = "scripted"

    def __init__(self, manifest: Manifest):
        super().__init__(manifest)

    @staticmethod
    def fidelity_profile(evidence: list[Evidence]) -> str:
        def channel_fidelity(channel: str) -> str:
            fidelities = {e.fidelity for e in evidence if e.channel == channel}
            if not fidelities:
                return "n/a"
            return FID_NATIVE if FID_NATIVE in fidelities else FID_TRANSCODED

        return profile_key(channel_fidelity("voice"), channel_fidelity("image"))

    def decide(self, task, evidence, kb, kb_refs=()):
        if task is None:
            raise BackendError("scripted backend needs a benchmark task id")
        key = self.fidelity_profile(evidence)
        fixture = task.fixtures.scripted_decision.get(key)
        if fixture is None:
            raise BackendError(
                f"task {task.task_id} has no scripted decision for profile {key!r}")
        return ActionDecision(action=fixture.action, confidence=fixture.confidence,
                              rationale=fixture.rationale)


class LlmClientBackend(ReasoningBackend):
    """Adapter posting the synthesis problem to an external model endpoint.

    Request body: {"task_id", "category", "actions", "evidence": [{source,
    channel, fidelity, summary}], "kb": [...]} with an optional bearer key.
    Expected reply body: {"action", "confidence", "rationale"}.
    """

    name = "llm"

    def __init__(self, endpoint: str, api_key: Optional[str] = None,
                 timeout: float = 60.0, manifest: Optional[Manifest] = None):
        super().__init__(manifest)
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def decide(self, task, evidence, kb, kb_refs=()):
        kb_entries = []
        if kb is not None:
            for ref in kb_refs:
                product = kb.product_by_id(ref)
                if product is not None:
                    kb_entries.append({
                        "product_id": product.product_id,
                        "name": product.name,
                        "warranty_terms": product.warranty_terms,
                        "exclusions": list(product.exclusions),
                    })
        body = {
            "task_id": task.task_id if task else None,
            "category": task.category if task else None,
            "actions": list(ACTIONS),
            "evidence": [
                {"source": e.source, "channel": e.channel,
                 "fidelity": e.fidelity, "summary": e.summary}
                for e in evidence
            ],
            "kb": kb_entries,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            reply = httpx.post(self.endpoint, json=body, headers=headers,
                               timeout=self.timeout)
            reply.raise_for_status()
            payload = reply.json()
            return ActionDecision.from_payload(payload)
        except (httpx.HTTPError, KeyError, ValueError, TypeError) as exc:
            raise BackendError(f"llm-endpoint-error: {exc}") from exc


@dataclass
class AgentSpec:
    kind: str
    backend: ReasoningBackend
    card: Optional[AgentCard] = None

    def __post_init__(self) -> None:
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")


# Per-category processing delays in milliseconds, keyed by analysis stage and
# received fidelity, plus one synthesis delay. The "reference" profile shapes
# end-to-end latency so the native arm runs slower overall (most of it on
# defect-report image analysis) while the text-bottleneck arm pays only the
# cheap caption/transcript echo.
DELAY_PROFILES: dict[str, dict] = {
    "reference": {
        "assembly_guidance": {
            "voice": {FID_NATIVE: 59.9, FID_TRANSCODED: 60.0},
            "synthesis": 36.7,
        },
        "product_defect": {
            "voice": {FID_NATIVE: 40.0, FID_TRANSCODED: 12.0},
            "image": {FID_NATIVE: 145.5, FID_TRANSCODED: 19.6},
            "synthesis": 20.0,
        },
        "visual_troubleshooting": {
            "image": {FID_NATIVE: 105.1, FID_TRANSCODED: 70.3},
            "synthesis": 40.0,
        },
        "warranty_claim": {
            "voice": {FID_NATIVE: 45.0, FID_TRANSCODED: 13.0},
            "image": {FID_NATIVE: 87.1, FID_TRANSCODED: 20.1},
            "synthesis": 26.0,
        },
    },
}


class AgentService:
    """JSON-RPC application behind one agent's HTTP endpoint."""

    def __init__(self, spec: AgentSpec, manifest: Optional[Manifest] = None,
                 delay_profile: Optional[dict] = None,
                 blob_fetcher: Callable[[str], bytes] = fetch_bytes,
                 sleeper: Callable[[float], None] = time.sleep):
        self.spec = spec
        self.card = spec.card
        self.manifest = manifest if manifest is not None else spec.backend.manifest
        self.delay_profile = delay_profile or {}
        self._blob_fetcher = blob_fetcher
        self._sleep = sleeper
        self._tasks: dict[str, TaskRecord] = {}
        self._lock = threading.Lock()

    # -- HTTP surface ------------------------------------------------------

    def handle_get(self, path: str):
        if path == WELL_KNOWN_PATH and self.card is not None:
            return 200, "application/json", encode_card(self.card)
        return None

    def handle_rpc(self, request: RpcRequest, headers: dict) -> RpcReply:
        if request.method == METHOD_GET:
            return self._handle_task_get(request)
        if request.method not in (METHOD_SEND, METHOD_SEND_SUBSCRIBE):
            # httpd maps unknown methods already; defensive for direct calls
            return JsonReply(rpc_error(request.id, -32601,
                                       f"method {request.method!r} not supported"))
        try:
            message, metadata = self._parse_params(request.params)
        except (KeyError, TypeError, ValueError) as exc:
            return JsonReply(rpc_error(request.id, RPC_INVALID_PARAMS, str(exc)))
        bad = self._first_unsupported_part(message)
        if bad is not None:
            return JsonReply(rpc_error(request.id, RPC_UNSUPPORTED_PART, bad))
        task_id = str(request.params.get("id") or message.message_id)
        if request.method == METHOD_SEND:
            try:
                record = self._run_task(task_id, message, metadata)
            except BackendError as exc:
                return JsonReply(rpc_error(request.id, RPC_SERVER_ERROR, str(exc)))
            return JsonReply(rpc_result(request.id, record.to_wire()))
        return SseReply(self._event_stream(task_id, message, metadata))

    def _handle_task_get(self, request: RpcRequest) -> RpcReply:
        task_id = request.params.get("id")
        with self._lock:
            record = self._tasks.get(task_id)
        if record is None:
            return JsonReply(rpc_error(request.id, RPC_INVALID_PARAMS,
                                       f"unknown task id {task_id!r}"))
        return JsonReply(rpc_result(request.id, record.to_wire()))

    # -- task execution ------------------------------------------------------

    def _parse_params(self, params: dict) -> tuple[Message, dict]:
        message = Message.from_wire(params["message"])
        metadata = params.get("metadata") or {}
        if not isinstance(metadata, dict):
            raise ValueError("params.metadata must be an object")
        return message, metadata

    def _first_unsupported_part(self, message: Message) -> Optional[str]:
        # Text is always acceptable post-transcode; media must match the card;
        # structured data parts are artifact-only in this mesh.
        for part in message.parts:
            if isinstance(part, TextPart):
                continue
            if isinstance(part, FilePart):
                if self.card is not None and self.card.accepts(part.mime_type):
                    continue
                return (f"unsupported part mime {part.mime_type!r} for "
                        f"{self.spec.kind} agent (router should transcode)")
            return f"data parts are not accepted by the {self.spec.kind} agent"
        return None

    def _run_task(self, task_id: str, message: Message, metadata: dict) -> TaskRecord:
        record = TaskRecord(id=task_id, history=[message],
                            metadata={"agent": self.spec.kind, **metadata})
        record.advance(TaskState.WORKING)
        try:
            artifact = self._produce_artifact(message, metadata)
        except BackendError:
            record.advance(TaskState.FAILED)
            with self._lock:
                self._tasks[task_id] = record
            raise
        record.artifacts.append(artifact)
        record.advance(TaskState.COMPLETED)
        with self._lock:
            self._tasks[task_id] = record
        return record

    def _event_stream(self, task_id: str, message: Message, metadata: dict):
        yield {"kind": "status-update", "taskId": task_id,
               "status": {"state": TaskState.WORKING.value}, "final": False}
        try:
            record = self._run_task(task_id, message, metadata)
        except BackendError as exc:
            yield {"kind": "status-update", "taskId": task_id,
                   "status": {"state": TaskState.FAILED.value, "message": str(exc)},
                   "final": True}
            return
        for artifact in record.artifacts:
            yield {"kind": "artifact-update", "taskId": task_id,
                   "artifact": artifact.to_wire()}
        yield {"kind": "status-update", "taskId": task_id,
               "status": {"state": TaskState.COMPLETED.value}, "final": True}

    def _produce_artifact(self, message: Message, metadata: dict) -> Artifact:
        task = self._benchmark_task(metadata)
        if self.spec.kind in (VOICE_KIND, VISION_KIND):
            return self._analysis_artifact(message, metadata, task)
        return self._synthesis_artifact(message, metadata, task)

    def _benchmark_task(self, metadata: dict) -> Optional[BenchmarkTask]:
        task_ref = metadata.get("benchmark_task_id")
        if task_ref and self.manifest is not None:
            return self.manifest.by_id.get(task_ref)
        return None

    def _apply_delay(self, task: Optional[BenchmarkTask], stage: str,
                     fidelity: Optional[str] = None) -> None:
        if task is None:
            return
        stages = self.delay_profile.get(task.category)
        if not stages:
            return
        value = stages.get(stage)
        if isinstance(value, dict):
            value = value.get(fidelity)
        if value:
            self._sleep(value / 1000.0)

    def _analysis_artifact(self, message: Message, metadata: dict,
                           task: Optional[BenchmarkTask]) -> Artifact:
        media_texts: list[str] = []
        context_notes: list[str] = []
        saw_media = False
        for part in message.parts:
            if isinstance(part, FilePart):
                saw_media = True
                payload = part.data if part.data is not None else self._fetch(part.uri)
                embedded = (media.extract_wav_transcript(payload)
                            if self.spec.kind == VOICE_KIND
                            else media.extract_png_caption(payload))
                media_texts.append(
                    embedded if embedded is not None
                    else f"unlabeled media ({len(payload)} bytes)")
            elif FIDELITY_MARKER in part.text:
                media_texts.append(part.text)
            else:
                context_notes.append(part.text)
        fidelity = FID_NATIVE if saw_media else FID_TRANSCODED
        inp = AnalysisInput(
            kind=self.spec.kind,
            fidelity=fidelity,
            media_texts=media_texts,
            context_notes=context_notes,
            instruction=str(metadata.get("instruction", "")),
            task=task,
        )
        stage = "voice" if self.spec.kind == VOICE_KIND else "image"
        self._apply_delay(task, stage, fidelity)
        evidence = self.spec.backend.analyze(inp)
        return Artifact(parts=[TextPart(encode_evidence([evidence]))],
                        name=f"{self.spec.kind}-evidence")

    def _fetch(self, uri: Optional[str]) -> bytes:
        if uri is None:
            raise BackendError("file part carries neither bytes nor uri")
        try:
            return self._blob_fetcher(uri)
        except Exception as exc:
            raise BackendError(f"payload fetch failed for {uri}: {exc}") from exc

    def _synthesis_artifact(self, message: Message, metadata: dict,
                            task: Optional[BenchmarkTask]) -> Artifact:
        evidence: list[Evidence] = []
        for part in message.parts:
            if not isinstance(part, TextPart):
                continue
            text = part.text
            if is_evidence_text(text):
                evidence.extend(decode_evidence(text))
            elif FIDELITY_MARKER in text:
                channel = "image" if f"[via={IMAGE_CAPTION}]" in text else "voice"
                evidence.append(Evidence(source="router", channel=channel,
                                         fidelity=FID_TRANSCODED, summary=text))
            else:
                evidence.append(Evidence(source="customer", channel="text",
                                         fidelity=FID_NATIVE, summary=text))
        if not evidence:
            raise BackendError("synthesis request carried no usable evidence")
        kb = self.manifest.kb if self.manifest is not None else None
        kb_refs = metadata.get("kb_refs") or ()
        self._apply_delay(task, "synthesis")
        decision = self.spec.backend.decide(task, evidence, kb, kb_refs)
        payload = decision.to_payload()
        payload["evidenceCount"] = len(evidence)
        payload["fidelityProfile"] = ScriptedBackend.fidelity_profile(evidence)
        return Artifact(parts=[DataPart(payload)], name="decision")


def serve_agent(spec: AgentSpec, host: str = "127.0.0.1", port: int = 0,
                manifest: Optional[Manifest] = None,
                delay_profile: Optional[dict] = None) -> tuple[ServerHandle, AgentService]:
    """Start one agent service; the card is built against the bound URL."""
    service = AgentService(spec, manifest=manifest, delay_profile=delay_profile)
    handle = start_server(service, host=host, port=port)
    service.card = spec.card or build_agent_card(spec.kind, handle.url)
    log.info("%s agent serving at %s", spec.kind, handle.url)
    return handle, service


def decision_from_record(record_wire: dict) -> ActionDecision:
    """Pull the decision payload out of a completed task record's artifacts."""
    for artifact in record_wire.get("artifacts", []):
        for part in artifact.get("parts", []):
            if part.get("kind") == "data" and "action" in part.get("data", {}):
                return ActionDecision.from_payload(part["data"])
    raise ValueError("record carries no decision artifact")
