"""Agent services and reasoning backends, unit level and against live servers."""

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modalmesh import agents as agents_mod
from modalmesh.agents import (
    AgentService,
    AgentSpec,
    BackendError,
    DELAY_PROFILES,
    Evidence,
    FALLBACK_CONFIDENCE,
    KeywordBackend,
    LlmClientBackend,
    RULE_CONFIDENCE,
    ScriptedBackend,
    build_agent_card,
    decision_from_record,
    decode_evidence,
    encode_evidence,
    is_evidence_text,
    matched_keywords,
    serve_agent,
)
from modalmesh.httpd import post_rpc, stream_rpc
from modalmesh.media import build_png, build_wav
from modalmesh.protocol import (
    METHOD_GET,
    METHOD_SEND,
    METHOD_SEND_SUBSCRIBE,
    RPC_UNSUPPORTED_PART,
    FilePart,
    Message,
    RpcRequest,
    TextPart,
    part_from_wire,
)
from modalmesh.routing import FIDELITY_MARKER

_SOURCES = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789-_.",
                   min_size=1, max_size=16)
_SUMMARIES = st.text(max_size=200).filter(lambda s: "\n===\n" not in s)


@st.composite
def _evidence(draw):
    return Evidence(
        source=draw(_SOURCES),
        channel=draw(st.sampled_from(["voice", "image", "text"])),
        fidelity=draw(st.sampled_from(["native", "transcoded"])),
        summary=draw(_SUMMARIES),
    )


@given(st.lists(_evidence(), min_size=1, max_size=6))
def test_evidence_codec_round_trip(records):
    decoded = decode_evidence(encode_evidence(records))
    assert [(e.source, e.channel, e.fidelity, e.summary) for e in decoded] == \
        [(e.source, e.channel, e.fidelity, e.summary) for e in records]
    # structured details are local-only and never cross the wire
    assert all(e.structured == {} for e in decoded)


def test_evidence_text_detection_and_errors():
    text = encode_evidence([Evidence("voice-agent", "voice", "native", "heard it")])
    assert is_evidence_text(text)
    assert not is_evidence_text("just a note")
    with pytest.raises(ValueError):
        decode_evidence("no header here")
    with pytest.raises(ValueError):
        encode_evidence([Evidence("a", "text", "native", "bad\n===\nsummary")])
    with pytest.raises(ValueError):
        Evidence("a", "smell", "native", "x")
    with pytest.raises(ValueError):
        Evidence("a", "voice", "approximate", "x")


def test_matched_keywords_whole_word_case_insensitive():
    vocabulary = frozenset({"screw", "cracked", "drop"})
    assert matched_keywords("The SCREW was Cracked.", vocabulary) == \
        {"screw", "cracked"}
    # plural and embedded forms do not match whole words
    assert matched_keywords("screws dropped", vocabulary) == set()
    assert matched_keywords("withdrop", vocabulary) == set()


@given(st.lists(st.sampled_from(["drop", "damage", "covered", "manufacturing",
                                 "hinge", "misaligned", "shelf"]),
                min_size=0, max_size=8),
       st.randoms(use_true_random=False))
def test_keyword_decision_ignores_order_and_duplication(words, rng):
    rules = _keyword_rules()
    backend = KeywordBackend(rules)
    base = [Evidence("text-agent", "text", "native", w) for w in words]
    shuffled = list(base) + [Evidence("x", "voice", "transcoded", w) for w in words]
    rng.shuffle(shuffled)
    as_one = [Evidence("y", "text", "native", " ".join(words))]

    def action(evidence):
        return backend.decide(None, evidence, None).action

    if base:
        assert action(base) == action(shuffled) == action(as_one)


def _keyword_rules():
    from modalmesh.benchmark import KeywordRule, KeywordRules

    return KeywordRules(
        version=1,
        rules=(
            KeywordRule(frozenset({"drop", "damage"}), "deny_warranty"),
            KeywordRule(frozenset({"covered", "manufacturing"}), "approve_warranty"),
        ),
        fallback_action="escalate_to_specialist",
    )


def test_keyword_backend_rule_order_and_confidences():
    backend = KeywordBackend(_keyword_rules())
    hit = backend.decide_from_keywords(frozenset({"drop", "damage", "covered"}))
    assert hit.action == "deny_warranty" and hit.confidence == RULE_CONFIDENCE
    # partial rule match is no match
    miss = backend.decide_from_keywords(frozenset({"drop"}))
    assert miss.action == "escalate_to_specialist"
    assert miss.confidence == FALLBACK_CONFIDENCE


def test_scripted_fidelity_profile_reduction():
    profile = ScriptedBackend.fidelity_profile
    voice_native = Evidence("v", "voice", "native", "x")
    voice_low = Evidence("v", "voice", "transcoded", "x")
    image_low = Evidence("i", "image", "transcoded", "x")
    note = Evidence("c", "text", "native", "x")
    assert profile([voice_native, image_low, note]) == "native|transcoded"
    # any native record lifts the channel to native
    assert profile([voice_low, voice_native, image_low]) == "native|transcoded"
    assert profile([voice_low, image_low]) == "transcoded|transcoded"
    assert profile([note]) == "n/a|n/a"


def test_scripted_backend_requires_task_and_known_profile(manifest):
    backend = ScriptedBackend(manifest)
    task = manifest.by_id["defect_001"]
    evidence = [Evidence("v", "voice", "native", "x"),
                Evidence("i", "image", "native", "x")]
    decision = backend.decide(task, evidence, manifest.kb)
    assert decision.action == task.fixtures.scripted_decision["native|native"].action
    with pytest.raises(BackendError):
        backend.decide(None, evidence, manifest.kb)
    with pytest.raises(BackendError):
        # voice-only profile is unreachable for a defect task
        backend.decide(task, [Evidence("v", "voice", "native", "x")], manifest.kb)


def test_agent_cards_declare_channel_capabilities():
    voice = build_agent_card("voice", "http://v")
    vision = build_agent_card("vision", "http://i")
    text = build_agent_card("text", "http://t")
    assert voice.capability_set() == frozenset({"audio/wav", "audio/webm"})
    assert vision.capability_set() == frozenset({"image/png", "image/jpeg"})
    assert text.capability_set() == frozenset({"text/plain"})
    # synthesis output modes include structured decisions without affecting input caps
    assert "application/json" in text.skills[0].output_modes
    with pytest.raises(ValueError):
        build_agent_card("telepathy", "http://x")


class _RecordingSleeper:
    def __init__(self):
        self.calls = []

    def __call__(self, seconds: float) -> None:
        self.calls.append(round(seconds * 1000.0, 3))


def _service(kind: str, manifest, delay_profile=None, sleeper=None) -> AgentService:
    backend = ScriptedBackend(manifest)
    service = AgentService(AgentSpec(kind=kind, backend=backend), manifest=manifest,
                           delay_profile=delay_profile,
                           sleeper=sleeper or (lambda s: None))
    service.card = build_agent_card(kind, "http://local.test")
    return service


def _send(service: AgentService, parts, task_id="defect_001", metadata=None):
    message = Message(role="user", parts=parts, message_id=f"{task_id}.msg")
    params = {"id": task_id, "message": message.to_wire(),
              "metadata": {"benchmark_task_id": task_id, **(metadata or {})}}
    return service.handle_rpc(RpcRequest(method=METHOD_SEND, params=params, id="r1"),
                              headers={})


def test_analysis_uses_fixture_summary_by_fidelity(manifest):
    task = manifest.by_id["defect_001"]
    service = _service("voice", manifest)

    native = _send(service, [FilePart("audio/wav", data=manifest.media_bytes(task.voice))])
    record = native.payload["result"]
    evidence = decode_evidence(record["artifacts"][0]["parts"][0]["text"])[0]
    assert evidence.fidelity == "native"
    assert evidence.summary == task.fixtures.voice_summary["native"]

    marker = TextPart(f"the clip {FIDELITY_MARKER} [via=speech_to_text]")
    transcoded = _send(service, [marker])
    evidence = decode_evidence(
        transcoded.payload["result"]["artifacts"][0]["parts"][0]["text"])[0]
    assert evidence.fidelity == "transcoded"
    assert evidence.summary == task.fixtures.voice_summary["transcoded"]


def test_analysis_echoes_when_no_fixture_is_available(manifest):
    service = _service("voice", manifest)
    reply = _send(service, [FilePart("audio/wav", data=build_wav("odd request"))],
                  task_id="not_in_manifest")
    evidence = decode_evidence(
        reply.payload["result"]["artifacts"][0]["parts"][0]["text"])[0]
    assert evidence.summary == "heard (native): odd request"


def test_unsupported_parts_rejected_with_specific_code(manifest):
    voice = _service("voice", manifest)
    reply = _send(voice, [FilePart("image/png", data=build_png("photo"))])
    assert reply.payload["error"]["code"] == RPC_UNSUPPORTED_PART

    from modalmesh.protocol import DataPart

    for kind in ("voice", "vision", "text"):
        service = _service(kind, manifest)
        reply = _send(service, [DataPart({"k": 1})])
        assert reply.payload["error"]["code"] == RPC_UNSUPPORTED_PART, kind


def test_simulated_delays_keyed_by_stage_and_fidelity(manifest):
    sleeper = _RecordingSleeper()
    service = _service("voice", manifest,
                       delay_profile=DELAY_PROFILES["reference"], sleeper=sleeper)
    task = manifest.by_id["assembly_001"]
    _send(service, [FilePart("audio/wav", data=manifest.media_bytes(task.voice))],
          task_id="assembly_001")
    assert sleeper.calls == [59.9]
    _send(service, [TextPart(f"clip {FIDELITY_MARKER} [via=speech_to_text]")],
          task_id="assembly_001")
    assert sleeper.calls == [59.9, 60.0]
    # unknown tasks never sleep
    _send(service, [FilePart("audio/wav", data=build_wav("x"))], task_id="foreign")
    assert sleeper.calls == [59.9, 60.0]


def test_synthesis_classifies_parts_and_reports_profile(manifest):
    task = manifest.by_id["defect_001"]
    service = _service("text", manifest)
    evidence_part = TextPart(encode_evidence([
        Evidence("voice-agent", "voice", "native", task.fixtures.voice_summary["native"]),
        Evidence("vision-agent", "image", "native", task.fixtures.vision_summary["native"]),
    ]))
    caption_marker = TextPart(f"a photo {FIDELITY_MARKER} [via=image_caption]")
    reply = _send(service, [TextPart(task.note), evidence_part, caption_marker],
                  metadata={"kb_refs": list(task.kb_refs)})
    record = reply.payload["result"]
    assert record["state"] == "completed"
    data_part = part_from_wire(record["artifacts"][0]["parts"][0])
    payload = data_part.payload
    assert payload["action"] == task.ground_truth
    assert payload["evidenceCount"] == 4  # note + 2 records + caption marker
    assert payload["fidelityProfile"] == "native|native"
    assert decision_from_record(record).action == task.ground_truth


def test_synthesis_with_no_usable_evidence_fails(manifest):
    service = _service("text", manifest)
    reply = _send(service, [])
    assert "error" in reply.payload


def test_task_get_returns_stored_record(manifest):
    service = _service("voice", manifest)
    task = manifest.by_id["defect_001"]
    _send(service, [FilePart("audio/wav", data=manifest.media_bytes(task.voice))])
    reply = service.handle_rpc(
        RpcRequest(method=METHOD_GET, params={"id": "defect_001"}, id="g1"), {})
    assert reply.payload["result"]["id"] == "defect_001"
    missing = service.handle_rpc(
        RpcRequest(method=METHOD_GET, params={"id": "nope"}, id="g2"), {})
    assert "error" in missing.payload


def test_live_agent_serves_card_and_streams_events(manifest):
    handle, service = serve_agent(
        AgentSpec(kind="voice", backend=ScriptedBackend(manifest)),
        manifest=manifest)
    try:
        card_url = handle.url + "/.well-known/agent-card.json"
        assert httpx.get(card_url).json()["name"] == "voice-agent"

        task = manifest.by_id["defect_001"]
        message = Message(role="user", parts=[
            FilePart("audio/wav", data=manifest.media_bytes(task.voice))],
            message_id="defect_001.msg")
        params = {"id": "defect_001", "message": message.to_wire(),
                  "metadata": {"benchmark_task_id": "defect_001"}}
        events = list(stream_rpc(handle.url, METHOD_SEND_SUBSCRIBE, params, "s1"))
        kinds = [e["kind"] for e in events]
        assert kinds == ["status-update", "artifact-update", "status-update"]
        assert events[0]["status"]["state"] == "working" and not events[0]["final"]
        assert events[-1]["status"]["state"] == "completed" and events[-1]["final"]
        assert is_evidence_text(events[1]["artifact"]["parts"][0]["text"])

        # the same task is retrievable after the stream closes
        got = post_rpc(handle.url, METHOD_GET, {"id": "defect_001"}, "g1")
        assert got.result["state"] == "completed"
    finally:
        handle.shutdown()


def test_llm_backend_posts_and_maps_errors(manifest, monkeypatch):
    captured = {}

    class _Reply:
        status_code = 200

        @staticmethod
        def raise_for_status():
            return None

        @staticmethod
        def json():
            return {"action": "order_part", "confidence": 0.9, "rationale": "sure"}

    def fake_post(url, json=None, headers=None, timeout=None):
        captured.update(url=url, body=json, headers=headers)
        return _Reply()

    monkeypatch.setattr(agents_mod.httpx, "post", fake_post)
    backend = LlmClientBackend("http://llm.test/v1", api_key="sekrit")
    task = manifest.by_id["assembly_001"]
    evidence = [Evidence("voice-agent", "voice", "native", "needs a screw")]
    decision = backend.decide(task, evidence, manifest.kb, task.kb_refs)
    assert decision.action == "order_part"
    assert captured["url"] == "http://llm.test/v1"
    assert captured["headers"]["Authorization"] == "Bearer sekrit"
    assert captured["body"]["task_id"] == "assembly_001"
    assert captured["body"]["evidence"][0]["fidelity"] == "native"
    assert {p["product_id"] for p in captured["body"]["kb"]} == set(task.kb_refs)

    def failing_post(url, json=None, headers=None, timeout=None):
        raise httpx.ConnectError("down")

    monkeypatch.setattr(agents_mod.httpx, "post", failing_post)
    with pytest.raises(BackendError, match="llm-endpoint-error"):
        backend.decide(task, evidence, manifest.kb)
