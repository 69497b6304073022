"""Benchmark bundle loading, validation, and fixture-level outcome recomputes.

The pinned tallies here (contingency cells, per-category correct counts,
keyword-arm agreement) are recomputed from the authored strings in the
checked-in bundle, independently of the generator's own self-check.
"""

import shutil

import pytest
import yaml

from modalmesh.agents import KeywordBackend, matched_keywords
from modalmesh.benchmark import (
    ACTIONS,
    CATEGORY_CHANNELS,
    EXPECTED_TASK_COUNTS,
    FID_ABSENT,
    FID_NATIVE,
    FID_TRANSCODED,
    ManifestValidationError,
    load_keyword_rules,
    load_manifest,
    profile_key,
    score,
)
from modalmesh.media import build_wav
from modalmesh.routing import FIDELITY_MARKER, RoutingMode


def test_bundle_shape(manifest):
    assert len(manifest.tasks) == 50
    by_category = {}
    for task in manifest.tasks:
        by_category[task.category] = by_category.get(task.category, 0) + 1
    assert by_category == EXPECTED_TASK_COUNTS
    assert len(manifest.kb.products) == 15
    assert len(manifest.kb.troubleshooting) == 10
    assert len(manifest.keyword_rules.rules) == 7
    assert manifest.keyword_rules.fallback_action == "escalate_to_specialist"
    assert len(manifest.error_labels) == 24
    assert all(t.ground_truth in ACTIONS for t in manifest.tasks)
    assert all(t.channels == CATEGORY_CHANNELS[t.category] for t in manifest.tasks)


def test_media_embeds_the_manifest_text(manifest):
    # spot-check one of each channel; the loader checks every file
    from modalmesh.media import extract_png_caption, extract_wav_transcript

    with_voice = next(t for t in manifest.tasks if t.voice is not None)
    with_image = next(t for t in manifest.tasks if t.image is not None)
    assert extract_wav_transcript(manifest.media_bytes(with_voice.voice)) == \
        with_voice.voice.text
    assert extract_png_caption(manifest.media_bytes(with_image.image)) == \
        with_image.image.text


def test_expected_profiles_cover_both_arms(manifest):
    task = manifest.by_id["defect_001"]
    assert task.expected_profile(RoutingMode.NATIVE.value) == \
        profile_key(FID_NATIVE, FID_NATIVE)
    assert task.expected_profile(RoutingMode.TEXT_BOTTLENECK.value) == \
        profile_key(FID_TRANSCODED, FID_TRANSCODED)
    voice_only = manifest.by_id["assembly_001"]
    assert voice_only.expected_profile("native") == profile_key(FID_NATIVE, FID_ABSENT)
    for task in manifest.tasks:
        assert task.reachable_profiles() <= set(task.fixtures.scripted_decision)


def _scripted_action(task, mode: str) -> str:
    return task.fixtures.scripted_decision[task.expected_profile(mode)].action


def test_scripted_fixtures_reproduce_contingency_table(manifest):
    cells = {"a": 0, "b": 0, "c": 0, "d": 0}
    per_category = {c: [0, 0] for c in EXPECTED_TASK_COUNTS}
    for task in manifest.tasks:
        treatment_ok = score(_scripted_action(task, "native"), task)
        baseline_ok = score(_scripted_action(task, "text_bottleneck"), task)
        cells["a" if treatment_ok and baseline_ok else
              "b" if treatment_ok else
              "c" if baseline_ok else "d"] += 1
        per_category[task.category][0] += treatment_ok
        per_category[task.category][1] += baseline_ok
    assert cells == {"a": 15, "b": 11, "c": 1, "d": 23}
    assert per_category == {
        "product_defect": [6, 1],
        "assembly_guidance": [7, 5],
        "visual_troubleshooting": [11, 9],
        "warranty_claim": [2, 1],
    }


def _keyword_evidence_texts(task, arm_fidelity: str) -> list[str]:
    """Every text the synthesis-side keyword matcher sees for one arm."""
    texts = [task.note]
    if task.voice is not None:
        texts.append(task.fixtures.voice_summary[arm_fidelity])
    if task.image is not None:
        if task.dispatch.image_route == "vision":
            texts.append(task.fixtures.vision_summary[arm_fidelity])
        else:
            # synthesis-routed images arrive as transcoded captions in both arms
            texts.append(
                f"{task.image.text} {FIDELITY_MARKER} [via=image_caption]")
    for extra in task.extra_images:
        texts.append(f"{extra.text} {FIDELITY_MARKER} [via=image_caption]")
    return texts


def test_keyword_fixtures_reproduce_ablation_tallies(manifest):
    backend = KeywordBackend(manifest.keyword_rules)
    vocabulary = manifest.keyword_rules.vocabulary
    correct = [0, 0]
    identical = 0
    for task in manifest.tasks:
        actions = []
        for arm, fidelity in enumerate(("native", "transcoded")):
            matched = set()
            for text in _keyword_evidence_texts(task, fidelity):
                matched |= matched_keywords(text, vocabulary)
            action = backend.decide_from_keywords(frozenset(matched)).action
            correct[arm] += score(action, task)
            actions.append(action)
        identical += actions[0] == actions[1]
    assert correct == [18, 18]
    assert identical == 35


def test_transcode_markers_stay_out_of_the_rule_vocabulary(manifest):
    marker_tokens = matched_keywords(
        f"x {FIDELITY_MARKER} [via=image_caption] [via=speech_to_text]",
        frozenset({"fidelity", "transcoded", "via", "image", "caption",
                   "speech", "to", "text"}))
    assert marker_tokens & manifest.keyword_rules.vocabulary == set()


def test_error_labels_name_exactly_the_treatment_failures(manifest):
    failures = {t.task_id for t in manifest.tasks
                if not score(_scripted_action(t, "native"), t)}
    assert failures == set(manifest.error_labels)
    modes = {}
    for entry in manifest.error_labels.values():
        modes[entry["failure_mode"]] = modes.get(entry["failure_mode"], 0) + 1
    assert modes == {
        "policy_lookup_failure": 11,
        "action_granularity_confusion": 6,
        "overconfident_visual_grounding": 4,
        "insufficient_context": 3,
    }


def test_keyword_rules_loader_flags_bad_entries(tmp_path):
    path = tmp_path / "rules.yaml"
    path.write_text(yaml.safe_dump({
        "version": 1,
        "rules": [
            {"keywords": ["Drop", "DAMAGE"], "action": "deny_warranty"},
            {"keywords": [], "action": "deny_warranty"},
            {"keywords": ["x"], "action": "not_an_action"},
        ],
        "fallback_action": "escalate_to_specialist",
    }), encoding="utf-8")
    rules, violations = load_keyword_rules(path)
    assert len(rules.rules) == 1
    assert rules.rules[0].keywords == frozenset({"drop", "damage"})
    assert len(violations) == 2


def _copy_bundle(bundle_dir, tmp_path):
    dest = tmp_path / "bundle"
    shutil.copytree(bundle_dir, dest)
    return dest


def _load_ok(path) -> dict:
    return yaml.safe_load((path / "manifest.yaml").read_text(encoding="utf-8"))


def test_loader_rejects_missing_media(bundle_dir, tmp_path):
    broken = _copy_bundle(bundle_dir, tmp_path)
    (broken / "media" / "defect_001_voice.wav").unlink()
    with pytest.raises(ManifestValidationError) as err:
        load_manifest(broken / "manifest.yaml")
    assert any("defect_001" in v for v in err.value.violations)


def test_loader_rejects_embedded_text_drift(bundle_dir, tmp_path):
    broken = _copy_bundle(bundle_dir, tmp_path)
    target = broken / "media" / "assembly_001_voice.wav"
    target.write_bytes(build_wav("a transcript the manifest never promised"))
    with pytest.raises(ManifestValidationError) as err:
        load_manifest(broken / "manifest.yaml")
    assert any("assembly_001" in v and "transcript" in v.lower()
               for v in err.value.violations)


def test_loader_rejects_unknown_ground_truth(bundle_dir, tmp_path):
    broken = _copy_bundle(bundle_dir, tmp_path)
    doc = _load_ok(broken)
    doc["tasks"][0]["ground_truth"] = "wave_a_wand"
    (broken / "manifest.yaml").write_text(yaml.safe_dump(doc), encoding="utf-8")
    with pytest.raises(ManifestValidationError) as err:
        load_manifest(broken / "manifest.yaml")
    assert any("wave_a_wand" in v for v in err.value.violations)


def test_loader_collects_multiple_violations(bundle_dir, tmp_path):
    broken = _copy_bundle(bundle_dir, tmp_path)
    doc = _load_ok(broken)
    doc["tasks"][0]["ground_truth"] = "wave_a_wand"
    doc["tasks"][1]["priority"] = "high"
    (broken / "manifest.yaml").write_text(yaml.safe_dump(doc), encoding="utf-8")
    with pytest.raises(ManifestValidationError) as err:
        load_manifest(broken / "manifest.yaml")
    assert len(err.value.violations) >= 2
