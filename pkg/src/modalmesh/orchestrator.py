"""Task orchestration: decompose, fan out through the router, synthesize.

The orchestrator is the mesh's only client. For each benchmark task it builds
analysis sub-tasks (voice, and vision when the dispatch plan routes the image
there), runs them in parallel through the router, collects their evidence
artifacts, then sends one synthesis request carrying the customer note, the
evidence, and any media the plan attaches directly.

Sub-task and message ids are derived from the task id, and the pairing
checksum hashes exactly the bytes the orchestrator emits before the router
touches them, so the two arms of a paired run can be proven to have received
identical inputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .agents import ActionDecision, decision_from_record
from .benchmark import BenchmarkTask, Manifest, score
from .httpd import TransportCallError, post_rpc, stream_rpc
from .mesh import Mesh
from .protocol import (
    METHOD_SEND,
    METHOD_SEND_SUBSCRIBE,
    FilePart,
    Message,
    Part,
    TextPart,
    dumps,
)
from .router import DESTINATION_HEADER, PRIORITY_HEADER
from .routing import (
    RoutingMode,
    TelemetryLog,
    externalize_oversize_parts,
    routing_profile,
)
from .stats import PairedOutcome

log = logging.getLogger(__name__)

VOICE_MIME = "audio/wav"
IMAGE_MIME = "image/png"

_INSTRUCTIONS = {
    "voice": "Transcribe the clip, then summarize tone, urgency, and the "
             "customer's stated problem.",
    "vision": "Inspect the photo for damage, defects, or assembly state "
              "relevant to the complaint.",
    "synthesis": "Choose exactly one support action from the label set, "
                 "grounded in the evidence and the product's warranty terms.",
}

# Sub-task kind -> mesh agent kind.
_AGENT_FOR = {"voice": "voice", "vision": "vision", "synthesis": "text"}


class OrchestrationError(RuntimeError):
    pass


class PairingError(RuntimeError):
    """The two arms of a paired run did not receive identical inputs."""


@dataclass
class SubTask:
    kind: str  # voice | vision | synthesis
    subtask_id: str
    parts: list[Part]
    instruction: str

    @property
    def agent_kind(self) -> str:
        return _AGENT_FOR[self.kind]

    @property
    def message_id(self) -> str:
        return f"{self.subtask_id}.msg"


def decompose(task: BenchmarkTask, manifest: Manifest) -> list[SubTask]:
    """Static sub-task plan for one task, in dispatch order.

    The synthesis sub-task's parts are its fixed inputs only; evidence parts
    are appended at run time between the note and any media attachments.
    """
    subtasks: list[SubTask] = []
    plan = task.dispatch
    if task.voice is not None:
        parts: list[Part] = [FilePart(VOICE_MIME, data=manifest.media_bytes(task.voice),
                                      name=Path(task.voice.path).name)]
        for ref in task.extra_voice:
            parts.append(FilePart(VOICE_MIME, data=manifest.media_bytes(ref),
                                  name=Path(ref.path).name))
        if "voice" in plan.text_context_with:
            parts.append(TextPart(task.note))
        subtasks.append(SubTask("voice", f"{task.task_id}.voice", parts,
                                _INSTRUCTIONS["voice"]))
    if task.image is not None and plan.image_route == "vision":
        parts = [FilePart(IMAGE_MIME, data=manifest.media_bytes(task.image),
                          name=Path(task.image.path).name)]
        if "image" in plan.text_context_with:
            parts.append(TextPart(task.note))
        subtasks.append(SubTask("vision", f"{task.task_id}.vision", parts,
                                _INSTRUCTIONS["vision"]))

    synthesis_parts: list[Part] = [TextPart(task.note)]
    if task.image is not None and plan.image_route == "synthesis":
        synthesis_parts.append(FilePart(IMAGE_MIME, data=manifest.media_bytes(task.image),
                                        name=Path(task.image.path).name))
    for ref in task.extra_images:
        synthesis_parts.append(FilePart(IMAGE_MIME, data=manifest.media_bytes(ref),
                                        name=Path(ref.path).name))
    subtasks.append(SubTask("synthesis", f"{task.task_id}.synthesis", synthesis_parts,
                            _INSTRUCTIONS["synthesis"]))
    return subtasks


@dataclass
class TaskResult:
    task_id: str
    category: str
    ground_truth: str
    mode: str
    decision: ActionDecision
    correct: bool
    e2e_s: float
    analysis_s: float
    synthesis_s: float
    input_checksum: str
    evidence_texts: list[str]
    routing_decisions: list = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def to_row(self) -> dict:
        outcomes = [d.outcome.value for d in self.routing_decisions]
        return {
            "task_id": self.task_id,
            "category": self.category,
            "mode": self.mode,
            "action": self.decision.action,
            "confidence": self.decision.confidence,
            "correct": self.correct,
            "e2e_latency_s": self.e2e_s,
            "analysis_latency_s": self.analysis_s,
            "synthesis_latency_s": self.synthesis_s,
            "input_checksum": self.input_checksum,
            "evidence_count": len(self.evidence_texts),
            "parts_native": outcomes.count("native"),
            "parts_transcoded": outcomes.count("transcoded"),
            "errors": self.errors,
        }


def _artifact_text(artifact_wire: dict) -> str:
    texts = [p.get("text", "") for p in artifact_wire.get("parts", [])
             if p.get("kind") == "text"]
    return "\n".join(t for t in texts if t)


class Orchestrator:
    """Runs benchmark tasks against a live mesh."""

    def __init__(self, mesh: Mesh, parallel_subtasks: bool = True,
                 timeout: float = 60.0):
        self.mesh = mesh
        self.parallel_subtasks = parallel_subtasks
        self.timeout = timeout

    # -- wire plumbing -------------------------------------------------------

    def _headers(self, kind: str, task: BenchmarkTask) -> dict[str, str]:
        return {
            DESTINATION_HEADER: self.mesh.agent_urls[_AGENT_FOR[kind]],
            PRIORITY_HEADER: str(task.priority),
        }

    def _params(self, sub: SubTask, task: BenchmarkTask,
                parts: Optional[list[Part]] = None) -> dict:
        message = Message(role="user", parts=parts if parts is not None else sub.parts,
                          message_id=sub.message_id)
        message = externalize_oversize_parts(message, self.mesh.blob_store,
                                             self.mesh.router_url)
        return {
            "id": sub.subtask_id,
            "message": message.to_wire(),
            "metadata": {
                "benchmark_task_id": task.task_id,
                "category": task.category,
                "kind": sub.kind,
                "instruction": sub.instruction,
                "kb_refs": list(task.kb_refs),
            },
        }

    def _run_analysis(self, sub: SubTask, task: BenchmarkTask,
                      params: dict) -> tuple[str, Optional[str], Optional[str]]:
        """Returns (kind, evidence_text, error)."""
        headers = self._headers(sub.kind, task)
        try:
            if sub.kind == "voice":
                return self._run_streaming(sub, params, headers)
            response = post_rpc(self.mesh.router_url, METHOD_SEND, params,
                                request_id=sub.subtask_id, headers=headers,
                                timeout=self.timeout)
            if not response.ok:
                return sub.kind, None, response.error.get("message", "rpc error")
            for artifact in response.result.get("artifacts", []):
                text = _artifact_text(artifact)
                if text:
                    return sub.kind, text, None
            return sub.kind, None, "no evidence artifact in reply"
        except TransportCallError as exc:
            return sub.kind, None, str(exc)

    def _run_streaming(self, sub: SubTask, params: dict,
                       headers: dict) -> tuple[str, Optional[str], Optional[str]]:
        evidence: Optional[str] = None
        final_state: Optional[str] = None
        detail = ""
        for event in stream_rpc(self.mesh.router_url, METHOD_SEND_SUBSCRIBE, params,
                                request_id=sub.subtask_id, headers=headers,
                                timeout=self.timeout):
            kind = event.get("kind")
            if kind == "artifact-update":
                text = _artifact_text(event.get("artifact", {}))
                if text:
                    evidence = text
            elif kind == "status-update" and event.get("final"):
                final_state = event.get("status", {}).get("state")
                detail = event.get("status", {}).get("message", "")
        if final_state == "completed" and evidence is not None:
            return sub.kind, evidence, None
        if final_state is None:
            return sub.kind, None, "stream ended without a final status event"
        return sub.kind, None, f"stream finished in state {final_state!r}: {detail}"

    # -- execution -----------------------------------------------------------

    def execute(self, task: BenchmarkTask) -> TaskResult:
        subtasks = decompose(task, self.mesh.manifest)
        analyses = [s for s in subtasks if s.kind != "synthesis"]
        synthesis = subtasks[-1]
        mode = self.mesh.router_service.mode.value

        started = time.perf_counter()
        analysis_params = [(sub, self._params(sub, task)) for sub in analyses]
        synthesis_static = self._params(synthesis, task)
        checksum = hashlib.sha256(dumps(
            [p for _, p in analysis_params] + [synthesis_static]
        ).encode("utf-8")).hexdigest()

        results: list[tuple[str, Optional[str], Optional[str]]] = []
        if analyses:
            if self.parallel_subtasks and len(analyses) > 1:
                with ThreadPoolExecutor(max_workers=len(analyses)) as pool:
                    futures = [pool.submit(self._run_analysis, sub, task, params)
                               for sub, params in analysis_params]
                    results = [f.result() for f in futures]
            else:
                results = [self._run_analysis(sub, task, params)
                           for sub, params in analysis_params]
        analysis_done = time.perf_counter()

        evidence_texts: list[str] = []
        errors: list[str] = []
        for kind, text, error in results:  # already in voice-then-vision order
            if text is not None:
                evidence_texts.append(text)
            else:
                errors.append(f"{kind}: {error}")
                evidence_texts.append(
                    f"analysis unavailable: the {kind} sub-task failed ({error})")

        if task.dispatch.merge_evidence and len(evidence_texts) > 1:
            evidence_parts: list[Part] = [TextPart("\n===\n".join(evidence_texts))]
        else:
            evidence_parts = [TextPart(t) for t in evidence_texts]
        # Note first, then evidence, then any media attachments from the plan.
        final_parts = ([synthesis.parts[0]] + evidence_parts + synthesis.parts[1:])
        params = self._params(synthesis, task, parts=final_parts)
        response = post_rpc(self.mesh.router_url, METHOD_SEND, params,
                            request_id=synthesis.subtask_id,
                            headers=self._headers("synthesis", task),
                            timeout=self.timeout)
        if not response.ok:
            raise OrchestrationError(
                f"synthesis failed for {task.task_id}: {response.error}")
        decision = decision_from_record(response.result)
        finished = time.perf_counter()

        routing_decisions = [d for d in self.mesh.router_service.decisions()
                             if d.task_id == task.task_id]
        return TaskResult(
            task_id=task.task_id,
            category=task.category,
            ground_truth=task.ground_truth,
            mode=mode,
            decision=decision,
            correct=score(decision.action, task),
            e2e_s=finished - started,
            analysis_s=analysis_done - started,
            synthesis_s=finished - analysis_done,
            input_checksum=checksum,
            evidence_texts=evidence_texts,
            routing_decisions=routing_decisions,
            errors=errors,
        )


# -- paired experiment ----------------------------------------------------------


@dataclass
class ExperimentResult:
    treatment_mode: str
    baseline_mode: str
    outcomes: list[PairedOutcome]
    results: dict[str, list[TaskResult]]  # mode value -> per-task results
    routing_profiles: dict[str, dict]  # "treatment"/"baseline" -> profile
    runlog_paths: dict[str, Path] = field(default_factory=dict)


def _write_runlog(path: Path, results: Sequence[TaskResult]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(result.to_row(), sort_keys=True) + "\n")


def run_paired_experiment(
    mesh: Mesh,
    modes: tuple[RoutingMode, RoutingMode] = (RoutingMode.NATIVE,
                                              RoutingMode.TEXT_BOTTLENECK),
    theta: Optional[float] = None,
    out_dir: Optional[Union[str, Path]] = None,
    parallel_subtasks: bool = True,
    task_ids: Optional[Sequence[str]] = None,
    progress: Optional[Callable[[str, int, int, TaskResult], None]] = None,
) -> ExperimentResult:
    """Run every task once per arm over the same mesh; treatment is modes[0].

    Each arm reconfigures the router, replays the full task list in manifest
    order, and writes a run log (plus part-level telemetry when out_dir is
    given). Input checksums must match across arms for every task.
    """
    manifest = mesh.manifest
    tasks = manifest.tasks
    if task_ids is not None:
        wanted = set(task_ids)
        unknown = wanted - set(manifest.by_id)
        if unknown:
            raise OrchestrationError(f"unknown task ids: {sorted(unknown)}")
        tasks = [t for t in tasks if t.task_id in wanted]
    if not tasks:
        raise OrchestrationError("no tasks selected")

    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    results: dict[str, list[TaskResult]] = {}
    profiles: dict[str, dict] = {}
    runlogs: dict[str, Path] = {}
    arm_labels = {modes[0].value: "treatment", modes[1].value: "baseline"}
    for mode in modes:
        telemetry = None
        if out_path is not None:
            telemetry = TelemetryLog(out_path / f"telemetry_{mode.value}.jsonl")
        mesh.configure_arm(mode, theta=theta, telemetry=telemetry)
        orchestrator = Orchestrator(mesh, parallel_subtasks=parallel_subtasks)
        arm_results: list[TaskResult] = []
        for i, task in enumerate(tasks):
            result = orchestrator.execute(task)
            arm_results.append(result)
            if progress is not None:
                progress(arm_labels[mode.value], i + 1, len(tasks), result)
        results[mode.value] = arm_results
        profiles[arm_labels[mode.value]] = routing_profile(
            mesh.router_service.decisions())
        if out_path is not None:
            runlogs[mode.value] = out_path / f"runlog_{mode.value}.jsonl"
            _write_runlog(runlogs[mode.value], arm_results)

    treatment, baseline = results[modes[0].value], results[modes[1].value]
    outcomes: list[PairedOutcome] = []
    for t_result, b_result in zip(treatment, baseline):
        if t_result.task_id != b_result.task_id:
            raise PairingError(f"arm task order diverged at {t_result.task_id}")
        if t_result.input_checksum != b_result.input_checksum:
            raise PairingError(
                f"input checksum mismatch for {t_result.task_id}: the arms did "
                f"not receive identical task inputs")
        outcomes.append(PairedOutcome(
            task_id=t_result.task_id,
            category=t_result.category,
            baseline_correct=b_result.correct,
            treatment_correct=t_result.correct,
            baseline_latency=b_result.e2e_s,
            treatment_latency=t_result.e2e_s,
        ))
    return ExperimentResult(
        treatment_mode=modes[0].value,
        baseline_mode=modes[1].value,
        outcomes=outcomes,
        results=results,
        routing_profiles=profiles,
        runlog_paths=runlogs,
    )
