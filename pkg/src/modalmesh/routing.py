"""Routing core: who gets the original part, who gets a text rendition.

The decision rule, per part, against the destination's declared input modes:

* data parts are transcode-exempt and always pass through natively;
* text parts pass through unchanged in every mode, but the recorded outcome
  still follows the capability check: delivering text to an agent that does
  not declare text/plain counts as a (identity) transcode;
* voice/image parts pass natively when the destination declares a matching
  mime type, subject to the mode: `native` needs only the capability match,
  `text_bottleneck` always transcodes, and `adaptive` additionally requires
  the task priority to reach the threshold theta.

Transcoding is mocked but deterministic: the speech-to-text and captioning
stand-ins recover the transcript/caption embedded in the synthetic media and
append the fidelity marker, so downstream agents can tell what they got.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

from . import media
from .protocol import (
    FilePart,
    Message,
    Modality,
    Part,
    TextPart,
    MAX_INLINE_BYTES,
    mime_matches,
    part_modality,
    representative_mime,
)

FIDELITY_MARKER = "[fidelity=transcoded]"

SPEECH_TO_TEXT = "speech_to_text"
IMAGE_CAPTION = "image_caption"


class RoutingMode(str, Enum):
    NATIVE = "native"
    TEXT_BOTTLENECK = "text_bottleneck"
    ADAPTIVE = "adaptive"


class RouteOutcome(str, Enum):
    NATIVE = "native"
    TRANSCODED = "transcoded"


class RoutingConfigError(ValueError):
    pass


class TranscoderError(RuntimeError):
    pass


def transcribe_audio(payload: bytes) -> str:
    """Mock speech-to-text: recover the embedded transcript, marked."""
    transcript = media.extract_wav_transcript(payload)
    if transcript is None:
        digest = hashlib.sha256(payload).hexdigest()[:8]
        transcript = f"(unintelligible audio clip, {len(payload)} bytes, {digest})"
    return f"{transcript} {FIDELITY_MARKER} [via={SPEECH_TO_TEXT}]"


def caption_image(payload: bytes) -> str:
    """Mock captioner: recover the embedded caption, marked."""
    caption = media.extract_png_caption(payload)
    if caption is None:
        digest = hashlib.sha256(payload).hexdigest()[:8]
        caption = f"(undescribed image, {len(payload)} bytes, {digest})"
    return f"{caption} {FIDELITY_MARKER} [via={IMAGE_CAPTION}]"


_TRANSCODERS: dict[str, Callable[[bytes], str]] = {
    SPEECH_TO_TEXT: transcribe_audio,
    IMAGE_CAPTION: caption_image,
}


def route_outcome(
    modality: Modality,
    mime: str,
    capabilities: Iterable[str],
    mode: RoutingMode,
    theta: Optional[float] = None,
    priority: int = 0,
) -> tuple[RouteOutcome, Optional[str]]:
    """The pure per-part decision. Returns (outcome, transcoder name or None)."""
    if modality is Modality.DATA:
        return RouteOutcome.NATIVE, None
    capable = any(mime_matches(mime, declared) for declared in capabilities)
    if modality is Modality.TEXT:
        # Pass-through either way; outcome records the capability mismatch.
        return (RouteOutcome.NATIVE if capable else RouteOutcome.TRANSCODED), None
    if mode is RoutingMode.NATIVE:
        allowed = capable
    elif mode is RoutingMode.TEXT_BOTTLENECK:
        allowed = False
    elif mode is RoutingMode.ADAPTIVE:
        if theta is None:
            raise RoutingConfigError("adaptive mode requires a theta threshold")
        allowed = capable and priority >= theta
    else:  # pragma: no cover - enum is closed
        raise RoutingConfigError(f"unknown mode {mode!r}")
    if allowed:
        return RouteOutcome.NATIVE, None
    name = SPEECH_TO_TEXT if modality is Modality.VOICE else IMAGE_CAPTION
    return RouteOutcome.TRANSCODED, name


@dataclass
class RoutingDecision:
    task_id: str
    part_modality: Modality
    destination_agent: str
    outcome: RouteOutcome
    transcoder_used: Optional[str]
    mode: RoutingMode
    decided_at: str
    decision_latency_ms: float

    def __post_init__(self) -> None:
        if self.outcome is RouteOutcome.NATIVE and self.transcoder_used is not None:
            raise RoutingConfigError("native outcome must not name a transcoder")
        if self.outcome is RouteOutcome.TRANSCODED:
            needs_transcoder = self.part_modality in (Modality.VOICE, Modality.IMAGE)
            if needs_transcoder and self.transcoder_used is None:
                raise RoutingConfigError(
                    f"transcoded {self.part_modality.value} part must name a transcoder"
                )
            if not needs_transcoder and self.transcoder_used is not None:
                raise RoutingConfigError(
                    "identity transcode of a text part must not name a transcoder"
                )

    def to_wire(self) -> dict:
        return {
            "taskId": self.task_id,
            "partModality": self.part_modality.value,
            "destinationAgent": self.destination_agent,
            "outcome": self.outcome.value,
            "transcoderUsed": self.transcoder_used,
            "mode": self.mode.value,
            "decidedAt": self.decided_at,
            "decisionLatencyMs": round(self.decision_latency_ms, 3),
        }


PayloadResolver = Callable[[FilePart], bytes]


def _inline_resolver(part: FilePart) -> bytes:
    if part.data is None:
        raise TranscoderError(
            f"part references {part.uri} but no payload resolver was provided"
        )
    return part.data


def route_part(
    part: Part,
    capabilities: Iterable[str],
    mode: RoutingMode,
    task_id: str,
    destination: str,
    theta: Optional[float] = None,
    priority: int = 0,
    resolver: PayloadResolver = _inline_resolver,
) -> tuple[Part, RoutingDecision]:
    """Decide and rewrite one part for delivery. Native parts pass unchanged."""
    start = time.perf_counter()
    modality = part_modality(part)
    outcome, transcoder = route_outcome(
        modality, representative_mime(part), capabilities, mode, theta, priority
    )
    delivered: Part = part
    if transcoder is not None:
        assert isinstance(part, FilePart)
        delivered = TextPart(text=_TRANSCODERS[transcoder](resolver(part)))
    decision = RoutingDecision(
        task_id=task_id,
        part_modality=modality,
        destination_agent=destination,
        outcome=outcome,
        transcoder_used=transcoder,
        mode=mode,
        decided_at=datetime.now(timezone.utc).isoformat(),
        decision_latency_ms=(time.perf_counter() - start) * 1000.0,
    )
    return delivered, decision


def route_message(
    message: Message,
    capabilities: Iterable[str],
    mode: RoutingMode,
    task_id: str,
    destination: str,
    theta: Optional[float] = None,
    priority: int = 0,
    resolver: PayloadResolver = _inline_resolver,
) -> tuple[Message, list[RoutingDecision]]:
    caps = list(capabilities)
    delivered_parts: list[Part] = []
    decisions: list[RoutingDecision] = []
    for part in message.parts:
        delivered, decision = route_part(
            part, caps, mode, task_id, destination, theta, priority, resolver
        )
        delivered_parts.append(delivered)
        decisions.append(decision)
    rewritten = Message(
        role=message.role,
        parts=delivered_parts,
        message_id=message.message_id,
        metadata=message.metadata,
    )
    return rewritten, decisions


def routing_profile(decisions: Iterable[Union[RoutingDecision, dict]]) -> dict:
    """Tabulate native/transcoded counts per part modality, plus totals."""
    profile = {
        m.value: {"native": 0, "transcoded": 0}
        for m in (Modality.VOICE, Modality.IMAGE, Modality.TEXT, Modality.DATA)
    }
    for decision in decisions:
        if isinstance(decision, RoutingDecision):
            modality = decision.part_modality.value
            outcome = decision.outcome.value
        else:
            modality = decision["partModality"]
            outcome = decision["outcome"]
        profile[modality][outcome] += 1
    total = {
        "native": sum(row["native"] for row in profile.values()),
        "transcoded": sum(row["transcoded"] for row in profile.values()),
    }
    profile["total"] = total
    return profile


class TelemetryLog:
    """Append-only JSON-lines sink for routing decisions."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, decision: RoutingDecision) -> None:
        line = json.dumps(decision.to_wire(), sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    @staticmethod
    def read(path: Union[str, Path], task_prefix: Optional[str] = None) -> list[dict]:
        records = []
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if task_prefix is None or record["taskId"].startswith(task_prefix):
                    records.append(record)
        return records


class BlobStore:
    """Content-addressed payload store backing oversize URI references."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put(self, payload: bytes) -> str:
        digest = hashlib.sha256(payload).hexdigest()
        target = self.root / digest
        if not target.exists():
            tmp = target.with_suffix(".tmp")
            tmp.write_bytes(payload)
            tmp.replace(target)
        return digest

    def get(self, digest: str) -> bytes:
        target = self.root / digest
        if not target.exists():
            raise KeyError(f"no blob {digest}")
        return target.read_bytes()

    def has(self, digest: str) -> bool:
        return (self.root / digest).exists()


def externalize_oversize_parts(
    message: Message, store: BlobStore, base_url: str
) -> Message:
    """Replace inline payloads above the wire limit with blob URI references."""
    parts: list[Part] = []
    for part in message.parts:
        if isinstance(part, FilePart) and part.data is not None and len(part.data) > MAX_INLINE_BYTES:
            digest = store.put(part.data)
            part = FilePart(
                mime_type=part.mime_type,
                uri=f"{base_url.rstrip('/')}/blob/{digest}",
                name=part.name,
            )
        parts.append(part)
    return Message(
        role=message.role,
        parts=parts,
        message_id=message.message_id,
        metadata=message.metadata,
    )
