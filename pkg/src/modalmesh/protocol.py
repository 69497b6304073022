"""Wire types for agent-to-agent task exchange.

Everything that crosses an HTTP boundary in this package is defined here:
typed message parts, messages, agent cards, task records, the JSON-RPC 2.0
envelope, and server-sent-event framing. Python field names are snake_case;
the JSON wire names are camelCase and are documented in PROTOCOL.md.

Encoding is deterministic (sorted keys, compact separators) so that equal
values always produce identical bytes.
"""

from __future__ import annotations

import base64
import binascii
import json
import re
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Optional, Union

PROTOCOL_VERSION = "0.2"

# Inline file payloads above this size must travel as URI references.
MAX_INLINE_BYTES = 1_048_576

_MIME_TOKEN = r"[A-Za-z0-9][A-Za-z0-9!#$&^_.+-]*"
_MIME_RE = re.compile(rf"^{_MIME_TOKEN}/{_MIME_TOKEN}$")
_MIME_WILDCARD_RE = re.compile(rf"^{_MIME_TOKEN}/\*$")


class ProtocolError(ValueError):
    """Base class for wire-format violations."""


class MimeFormatError(ProtocolError):
    pass


class PartStructureError(ProtocolError):
    """A part's fields violate its kind's structural rules."""


class OversizeInlineError(ProtocolError):
    """Inline file payload exceeds MAX_INLINE_BYTES."""


class MessageDecodeError(ProtocolError):
    pass


class RpcEnvelopeError(ProtocolError):
    pass


class TaskStateError(ProtocolError):
    """Illegal task state transition."""


class TruncatedFrameError(ProtocolError):
    """SSE byte stream ended inside an unterminated frame."""


class Modality(str, Enum):
    TEXT = "text"
    VOICE = "voice"
    IMAGE = "image"
    DATA = "data"


def validate_mime(mime: str, allow_wildcard: bool = False) -> str:
    """Check type/subtype syntax and return the normalized (lowercase) form."""
    if not isinstance(mime, str):
        raise MimeFormatError(f"mime type must be a string, got {type(mime).__name__}")
    if _MIME_RE.match(mime):
        return mime.lower()
    if allow_wildcard and _MIME_WILDCARD_RE.match(mime):
        return mime.lower()
    raise MimeFormatError(f"not a valid type/subtype mime string: {mime!r}")


def mime_matches(mime: str, declared: str) -> bool:
    """True if a concrete mime type falls under a declared type.

    Declarations may be exact ("image/png") or top-level wildcards
    ("image/*"). Comparison is case-insensitive.
    """
    mime = mime.lower()
    declared = declared.lower()
    if declared == mime:
        return True
    if declared.endswith("/*"):
        return mime.split("/", 1)[0] == declared[:-2]
    return False


@dataclass
class TextPart:
    text: str
    kind: str = field(default="text", init=False)


@dataclass
class FilePart:
    """A binary attachment, carried inline (bytes) or by URI reference.

    Exactly one of `data` and `uri` must be set. Inline payloads larger than
    MAX_INLINE_BYTES are representable in memory but refuse to encode; the
    router converts them to URI references before they reach the wire.
    """

    mime_type: str
    data: Optional[bytes] = None
    uri: Optional[str] = None
    name: Optional[str] = None
    kind: str = field(default="file", init=False)

    def __post_init__(self) -> None:
        self.mime_type = validate_mime(self.mime_type)
        if (self.data is None) == (self.uri is None):
            raise PartStructureError(
                "file part must carry exactly one of inline data or a uri"
            )


@dataclass
class DataPart:
    payload: dict
    kind: str = field(default="data", init=False)

    def __post_init__(self) -> None:
        if not isinstance(self.payload, dict):
            raise PartStructureError("data part payload must be a JSON object")


Part = Union[TextPart, FilePart, DataPart]


def part_modality(part: Part) -> Modality:
    """Classify a part for routing purposes.

    Text parts are text, data parts are data. File parts classify by the
    top-level mime type: audio/* is voice, image/* is image, and anything
    else (pdf, video, octet-stream, ...) is treated as opaque data.
    """
    if isinstance(part, TextPart):
        return Modality.TEXT
    if isinstance(part, DataPart):
        return Modality.DATA
    top = part.mime_type.split("/", 1)[0]
    if top == "audio":
        return Modality.VOICE
    if top == "image":
        return Modality.IMAGE
    return Modality.DATA


def representative_mime(part: Part) -> str:
    """The mime type used for capability membership checks."""
    if isinstance(part, TextPart):
        return "text/plain"
    if isinstance(part, DataPart):
        return "application/json"
    return part.mime_type


def part_to_wire(part: Part) -> dict:
    if isinstance(part, TextPart):
        return {"kind": "text", "text": part.text}
    if isinstance(part, DataPart):
        return {"kind": "data", "data": part.payload}
    wire: dict[str, Any] = {"kind": "file", "mimeType": part.mime_type}
    if part.name is not None:
        wire["name"] = part.name
    if part.data is not None:
        if len(part.data) > MAX_INLINE_BYTES:
            raise OversizeInlineError(
                f"inline payload of {len(part.data)} bytes exceeds the "
                f"{MAX_INLINE_BYTES}-byte limit; convert to a uri reference"
            )
        wire["data"] = base64.b64encode(part.data).decode("ascii")
    else:
        wire["uri"] = part.uri
    return wire


def part_from_wire(wire: dict) -> Part:
    if not isinstance(wire, dict):
        raise MessageDecodeError(f"part must be an object, got {type(wire).__name__}")
    kind = wire.get("kind")
    if kind == "text":
        text = wire.get("text")
        if not isinstance(text, str):
            raise MessageDecodeError("text part requires a string 'text' field")
        return TextPart(text=text)
    if kind == "data":
        payload = wire.get("data")
        if not isinstance(payload, dict):
            raise MessageDecodeError("data part requires an object 'data' field")
        return DataPart(payload=payload)
    if kind == "file":
        # mediaType is accepted as a decode-time alias; mimeType is always emitted.
        mime = wire.get("mimeType", wire.get("mediaType"))
        if mime is None:
            raise MessageDecodeError("file part requires a mimeType")
        has_data = "data" in wire
        has_uri = "uri" in wire
        if has_data == has_uri:
            raise MessageDecodeError(
                "file part must carry exactly one of 'data' and 'uri'"
            )
        if has_data:
            encoded = wire["data"]
            if not isinstance(encoded, str):
                raise MessageDecodeError("file part 'data' must be a base64 string")
            try:
                raw = base64.b64decode(encoded, validate=True)
            except (binascii.Error, ValueError) as exc:
                raise MessageDecodeError(f"invalid base64 payload: {exc}") from exc
            if len(raw) > MAX_INLINE_BYTES:
                raise OversizeInlineError(
                    f"decoded inline payload of {len(raw)} bytes exceeds the "
                    f"{MAX_INLINE_BYTES}-byte limit"
                )
            return FilePart(mime_type=mime, data=raw, name=wire.get("name"))
        return FilePart(mime_type=mime, uri=wire["uri"], name=wire.get("name"))
    raise MessageDecodeError(f"unknown part kind: {kind!r}")


@dataclass
class Message:
    role: str  # "user" | "agent"
    parts: list[Part] = field(default_factory=list)
    message_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    metadata: dict = field(default_factory=dict)

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {
            "role": self.role,
            "parts": [part_to_wire(p) for p in self.parts],
            "messageId": self.message_id,
        }
        if self.metadata:
            wire["metadata"] = self.metadata
        return wire

    @classmethod
    def from_wire(cls, wire: dict) -> "Message":
        if not isinstance(wire, dict):
            raise MessageDecodeError("message must be an object")
        role = wire.get("role")
        if role not in ("user", "agent"):
            raise MessageDecodeError(f"message role must be user/agent, got {role!r}")
        parts_wire = wire.get("parts")
        if not isinstance(parts_wire, list):
            raise MessageDecodeError("message requires a 'parts' array")
        return cls(
            role=role,
            parts=[part_from_wire(p) for p in parts_wire],
            message_id=wire.get("messageId", uuid.uuid4().hex),
            metadata=wire.get("metadata", {}) or {},
        )


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def encode_message(message: Message) -> bytes:
    return dumps(message.to_wire()).encode("utf-8")


def decode_message(raw: Union[bytes, str]) -> Message:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        wire = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MessageDecodeError(f"malformed json: {exc}") from exc
    return Message.from_wire(wire)


@dataclass
class Skill:
    id: str
    input_modes: list[str]
    output_modes: list[str]
    description: str = ""

    def __post_init__(self) -> None:
        self.input_modes = [validate_mime(m, allow_wildcard=True) for m in self.input_modes]
        self.output_modes = [validate_mime(m, allow_wildcard=True) for m in self.output_modes]

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {
            "id": self.id,
            "inputModes": list(self.input_modes),
            "outputModes": list(self.output_modes),
        }
        if self.description:
            wire["description"] = self.description
        return wire

    @classmethod
    def from_wire(cls, wire: dict) -> "Skill":
        try:
            return cls(
                id=wire["id"],
                input_modes=list(wire["inputModes"]),
                output_modes=list(wire["outputModes"]),
                description=wire.get("description", ""),
            )
        except (KeyError, TypeError) as exc:
            raise MessageDecodeError(f"malformed skill: {exc}") from exc


@dataclass
class AgentCard:
    """Self-description served at /.well-known/agent-card.json."""

    name: str
    url: str
    skills: list[Skill]
    description: str = ""
    protocol_version: str = PROTOCOL_VERSION

    def capability_set(self) -> frozenset[str]:
        """Union of declared input modes across all skills."""
        modes: set[str] = set()
        for skill in self.skills:
            modes.update(skill.input_modes)
        return frozenset(modes)

    def accepts(self, mime: str) -> bool:
        return any(mime_matches(mime, declared) for declared in self.capability_set())

    def to_wire(self) -> dict:
        return {
            "name": self.name,
            "url": self.url,
            "description": self.description,
            "protocolVersion": self.protocol_version,
            "skills": [s.to_wire() for s in self.skills],
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "AgentCard":
        if not isinstance(wire, dict):
            raise MessageDecodeError("agent card must be an object")
        try:
            skills = [Skill.from_wire(s) for s in wire["skills"]]
            return cls(
                name=wire["name"],
                url=wire["url"],
                skills=skills,
                description=wire.get("description", ""),
                protocol_version=wire.get("protocolVersion", PROTOCOL_VERSION),
            )
        except (KeyError, TypeError) as exc:
            raise MessageDecodeError(f"malformed agent card: {exc}") from exc


def encode_card(card: AgentCard) -> bytes:
    return dumps(card.to_wire()).encode("utf-8")


def decode_card(raw: Union[bytes, str]) -> AgentCard:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        wire = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MessageDecodeError(f"malformed card json: {exc}") from exc
    return AgentCard.from_wire(wire)


class TaskState(str, Enum):
    SUBMITTED = "submitted"
    WORKING = "working"
    COMPLETED = "completed"
    FAILED = "failed"


_LEGAL_TRANSITIONS: dict[TaskState, frozenset[TaskState]] = {
    TaskState.SUBMITTED: frozenset({TaskState.WORKING, TaskState.FAILED}),
    TaskState.WORKING: frozenset({TaskState.COMPLETED, TaskState.FAILED}),
    TaskState.COMPLETED: frozenset(),
    TaskState.FAILED: frozenset(),
}


@dataclass
class Artifact:
    parts: list[Part]
    name: Optional[str] = None

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {"parts": [part_to_wire(p) for p in self.parts]}
        if self.name is not None:
            wire["name"] = self.name
        return wire

    @classmethod
    def from_wire(cls, wire: dict) -> "Artifact":
        return cls(
            parts=[part_from_wire(p) for p in wire.get("parts", [])],
            name=wire.get("name"),
        )


@dataclass
class TaskRecord:
    """Server-side task: id, state machine, message history, artifacts."""

    id: str
    state: TaskState = TaskState.SUBMITTED
    history: list[Message] = field(default_factory=list)
    artifacts: list[Artifact] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def advance(self, new_state: TaskState) -> None:
        if new_state not in _LEGAL_TRANSITIONS[self.state]:
            raise TaskStateError(
                f"illegal task transition {self.state.value} -> {new_state.value}"
            )
        self.state = new_state

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "state": self.state.value,
            "history": [m.to_wire() for m in self.history],
            "artifacts": [a.to_wire() for a in self.artifacts],
            "metadata": self.metadata,
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "TaskRecord":
        return cls(
            id=wire["id"],
            state=TaskState(wire["state"]),
            history=[Message.from_wire(m) for m in wire.get("history", [])],
            artifacts=[Artifact.from_wire(a) for a in wire.get("artifacts", [])],
            metadata=wire.get("metadata", {}) or {},
        )


# --- JSON-RPC 2.0 envelope ---------------------------------------------------

METHOD_SEND = "tasks/send"
METHOD_SEND_SUBSCRIBE = "tasks/sendSubscribe"
METHOD_GET = "tasks/get"

RPC_PARSE_ERROR = -32700
RPC_INVALID_REQUEST = -32600
RPC_METHOD_NOT_FOUND = -32601
RPC_INVALID_PARAMS = -32602
RPC_SERVER_ERROR = -32000
RPC_UNSUPPORTED_PART = -32010


@dataclass
class RpcRequest:
    method: str
    params: dict = field(default_factory=dict)
    id: Union[str, int, None] = None

    def to_wire(self) -> dict:
        return {
            "jsonrpc": "2.0",
            "id": self.id,
            "method": self.method,
            "params": self.params,
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "RpcRequest":
        if not isinstance(wire, dict) or wire.get("jsonrpc") != "2.0":
            raise RpcEnvelopeError("request is not a JSON-RPC 2.0 envelope")
        method = wire.get("method")
        if not isinstance(method, str):
            raise RpcEnvelopeError("request requires a string method")
        params = wire.get("params", {})
        if not isinstance(params, dict):
            raise RpcEnvelopeError("params must be an object")
        return cls(method=method, params=params, id=wire.get("id"))


def rpc_result(request_id: Union[str, int, None], result: Any) -> dict:
    return {"jsonrpc": "2.0", "id": request_id, "result": result}


def rpc_error(
    request_id: Union[str, int, None],
    code: int,
    message: str,
    data: Any = None,
) -> dict:
    err: dict[str, Any] = {"code": code, "message": message}
    if data is not None:
        err["data"] = data
    return {"jsonrpc": "2.0", "id": request_id, "error": err}


@dataclass
class RpcResponse:
    id: Union[str, int, None]
    result: Any = None
    error: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @classmethod
    def from_wire(cls, wire: dict) -> "RpcResponse":
        if not isinstance(wire, dict) or wire.get("jsonrpc") != "2.0":
            raise RpcEnvelopeError("response is not a JSON-RPC 2.0 envelope")
        if ("result" in wire) == ("error" in wire):
            raise RpcEnvelopeError("response must carry exactly one of result/error")
        return cls(id=wire.get("id"), result=wire.get("result"), error=wire.get("error"))


# --- Server-sent events -------------------------------------------------------

def sse_frame(event: dict) -> bytes:
    """Encode one event as an SSE frame: data line(s) + blank-line terminator."""
    return b"data: " + dumps(event).encode("utf-8") + b"\n\n"


def sse_iter_frames(raw: bytes) -> Iterator[dict]:
    """Parse a complete SSE byte stream into event payloads.

    Multiple data: lines within one frame are joined with a newline, per the
    SSE spec. A stream that ends mid-frame raises TruncatedFrameError.
    """
    text = raw.decode("utf-8")
    pending: list[str] = []
    saw_terminator_for_pending = False
    for line in text.split("\n"):
        if line == "":
            if pending:
                yield _sse_payload(pending)
                pending = []
            saw_terminator_for_pending = True
            continue
        saw_terminator_for_pending = False
        if line.startswith("data:"):
            pending.append(line[5:].lstrip(" "))
        # Comment and other field lines are ignored.
    if pending:
        raise TruncatedFrameError("stream ended inside an unterminated SSE frame")
    if not saw_terminator_for_pending and text and not text.endswith("\n"):
        raise TruncatedFrameError("stream ended without a frame terminator")


def _sse_payload(data_lines: list[str]) -> dict:
    joined = "\n".join(data_lines)
    try:
        return json.loads(joined)
    except json.JSONDecodeError as exc:
        raise MessageDecodeError(f"malformed SSE payload: {exc}") from exc


class SseAssembler:
    """Incremental SSE parser for streaming clients: feed chunks, get events."""

    def __init__(self) -> None:
        self._buffer = b""

    def feed(self, chunk: bytes) -> list[dict]:
        self._buffer += chunk
        events: list[dict] = []
        while b"\n\n" in self._buffer:
            frame, self._buffer = self._buffer.split(b"\n\n", 1)
            lines = [
                line[5:].lstrip(" ")
                for line in frame.decode("utf-8").split("\n")
                if line.startswith("data:")
            ]
            if lines:
                events.append(_sse_payload(lines))
        return events

    def close(self) -> None:
        if self._buffer.strip():
            raise TruncatedFrameError("stream ended inside an unterminated SSE frame")
