"""modalmesh: a multimodal agent mesh with fidelity-aware routing.

Three specialist agents (voice, vision, text synthesis) speak JSON-RPC over
HTTP behind a routing proxy that decides, per message part, whether media
travels natively or gets transcoded to text. The package ships a 50-task
customer-support benchmark and the statistics to compare routing policies on
it as a paired experiment.
"""

from .agents import (
    ActionDecision,
    AgentService,
    AgentSpec,
    DELAY_PROFILES,
    Evidence,
    KeywordBackend,
    LlmClientBackend,
    ReasoningBackend,
    ScriptedBackend,
    build_agent_card,
    decode_evidence,
    encode_evidence,
    serve_agent,
)
from .benchmark import (
    ACTIONS,
    CATEGORIES,
    BenchmarkTask,
    Manifest,
    ManifestParseError,
    ManifestValidationError,
    load_manifest,
    score,
)
from .config import ConfigError, RunConfig, build_config
from .media import MediaFormatError, build_png, build_wav
from .mesh import Mesh, make_backend, start_mesh
from .orchestrator import (
    ExperimentResult,
    Orchestrator,
    OrchestrationError,
    PairingError,
    SubTask,
    TaskResult,
    decompose,
    run_paired_experiment,
)
from .protocol import (
    MAX_INLINE_BYTES,
    AgentCard,
    Artifact,
    DataPart,
    FilePart,
    Message,
    OversizeInlineError,
    Skill,
    SseAssembler,
    TaskRecord,
    TextPart,
    part_from_wire,
    part_to_wire,
    sse_frame,
)
from .registry import CardRegistry, CardFetchError
from .routing import (
    BlobStore,
    RouteOutcome,
    RoutingDecision,
    RoutingMode,
    TelemetryLog,
    caption_image,
    route_message,
    route_part,
    routing_profile,
    transcribe_audio,
)
from .stats import (
    ContingencyTable,
    PairedOutcome,
    ReportBundle,
    StatsInputError,
    bootstrap_ci,
    mcnemar_exact,
    paired_t,
    render_report,
    tca,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIONS",
    "ActionDecision",
    "AgentCard",
    "AgentService",
    "AgentSpec",
    "Artifact",
    "BenchmarkTask",
    "BlobStore",
    "CATEGORIES",
    "CardFetchError",
    "CardRegistry",
    "ConfigError",
    "ContingencyTable",
    "DELAY_PROFILES",
    "DataPart",
    "Evidence",
    "ExperimentResult",
    "FilePart",
    "KeywordBackend",
    "LlmClientBackend",
    "MAX_INLINE_BYTES",
    "Manifest",
    "ManifestParseError",
    "ManifestValidationError",
    "MediaFormatError",
    "Mesh",
    "Message",
    "OrchestrationError",
    "Orchestrator",
    "OversizeInlineError",
    "PairedOutcome",
    "PairingError",
    "ReasoningBackend",
    "ReportBundle",
    "RouteOutcome",
    "RoutingDecision",
    "RoutingMode",
    "RunConfig",
    "ScriptedBackend",
    "Skill",
    "SseAssembler",
    "StatsInputError",
    "SubTask",
    "TaskRecord",
    "TaskResult",
    "TelemetryLog",
    "TextPart",
    "bootstrap_ci",
    "build_agent_card",
    "build_config",
    "build_png",
    "build_wav",
    "caption_image",
    "decode_evidence",
    "decompose",
    "encode_evidence",
    "load_manifest",
    "make_backend",
    "mcnemar_exact",
    "paired_t",
    "part_from_wire",
    "part_to_wire",
    "render_report",
    "route_message",
    "route_part",
    "routing_profile",
    "run_paired_experiment",
    "score",
    "serve_agent",
    "sse_frame",
    "start_mesh",
    "tca",
    "transcribe_audio",
    "write_report",
]
