"""Benchmark manifest: tasks, knowledge base, fixtures, dispatch plans.

A benchmark lives in one directory: a YAML manifest plus the media files it
references by relative path. The manifest carries, per task, the customer's
text note, voice/image media (with the transcript/caption that is also
embedded in the bytes), a dispatch plan for the orchestrator, and the
fixture material that makes runs hermetic: per-fidelity evidence summaries
and the scripted decision table keyed by fidelity profile.

`load_manifest` validates the whole bundle eagerly and reports every
violation it finds in one pass. See BENCHMARK_FORMAT.md for the schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import yaml

from . import media as media_mod

SCHEMA_VERSION = 1

ACTIONS = (
    "approve_warranty",
    "deny_warranty",
    "initiate_replacement",
    "initiate_return",
    "order_part",
    "escalate_to_specialist",
    "provide_instructions",
    "troubleshoot_step",
)

CATEGORIES = (
    "product_defect",
    "assembly_guidance",
    "visual_troubleshooting",
    "warranty_claim",
)

# Media channels per category; every category also carries a text note.
CATEGORY_CHANNELS: dict[str, frozenset[str]] = {
    "product_defect": frozenset({"voice", "image"}),
    "assembly_guidance": frozenset({"voice"}),
    "visual_troubleshooting": frozenset({"image"}),
    "warranty_claim": frozenset({"voice", "image"}),
}

EXPECTED_TASK_COUNTS = {
    "product_defect": 13,
    "assembly_guidance": 12,
    "visual_troubleshooting": 12,
    "warranty_claim": 13,
}
EXPECTED_PRODUCT_COUNT = 15
EXPECTED_TROUBLESHOOTING_COUNT = 10

FID_NATIVE = "native"
FID_TRANSCODED = "transcoded"
FID_ABSENT = "n/a"


def profile_key(voice_fidelity: str, image_fidelity: str) -> str:
    """Canonical fidelity-profile key: '<voice>|<image>'."""
    return f"{voice_fidelity}|{image_fidelity}"


class ManifestParseError(ValueError):
    """The manifest file is structurally unreadable."""


class ManifestValidationError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        summary = "\n".join(f"  - {v}" for v in violations)
        super().__init__(f"manifest failed validation ({len(violations)} problem(s)):\n{summary}")


@dataclass(frozen=True)
class MediaRef:
    path: str  # relative to the manifest directory
    text: str  # transcript (voice) or caption (image), also embedded in the bytes


@dataclass(frozen=True)
class DispatchPlan:
    """Per-task routing shape the orchestrator follows.

    image_route sends the task's image either to the vision agent for
    analysis or straight to the synthesis agent as an attachment;
    text_context_with attaches the customer's note to the named analysis
    sub-tasks; merge_evidence collapses the evidence parts handed to
    synthesis into a single part.
    """

    image_route: str = "vision"
    text_context_with: tuple[str, ...] = ()
    merge_evidence: bool = False


@dataclass(frozen=True)
class FixtureDecision:
    action: str
    confidence: float
    rationale: str


@dataclass(frozen=True)
class TaskFixtures:
    voice_summary: Optional[dict[str, str]]  # fidelity -> summary
    vision_summary: Optional[dict[str, str]]
    scripted_decision: dict[str, FixtureDecision]  # profile key -> decision


@dataclass(frozen=True)
class BenchmarkTask:
    task_id: str
    category: str
    priority: int
    ground_truth: str
    note: str
    kb_refs: tuple[str, ...]
    voice: Optional[MediaRef]
    image: Optional[MediaRef]
    extra_voice: tuple[MediaRef, ...]
    extra_images: tuple[MediaRef, ...]
    dispatch: DispatchPlan
    fixtures: TaskFixtures

    @property
    def channels(self) -> frozenset[str]:
        return CATEGORY_CHANNELS[self.category]

    def expected_profile(self, mode: str) -> str:
        """Fidelity profile this task reaches under 'native'/'text_bottleneck'."""
        if "voice" in self.channels:
            voice = FID_NATIVE if mode == "native" else FID_TRANSCODED
        else:
            voice = FID_ABSENT
        if "image" in self.channels:
            if mode == "native" and self.dispatch.image_route == "vision":
                image = FID_NATIVE
            else:
                image = FID_TRANSCODED
        else:
            image = FID_ABSENT
        return profile_key(voice, image)

    def reachable_profiles(self) -> frozenset[str]:
        return frozenset(
            {self.expected_profile("native"), self.expected_profile("text_bottleneck")}
        )


@dataclass(frozen=True)
class Product:
    product_id: str
    name: str
    warranty_terms: str
    exclusions: tuple[str, ...]


@dataclass(frozen=True)
class TroubleshootingEntry:
    symptom: str
    resolution_action: str
    note: str


@dataclass
class KnowledgeBase:
    products: list[Product]
    troubleshooting: list[TroubleshootingEntry]

    def product_by_id(self, product_id: str) -> Optional[Product]:
        for product in self.products:
            if product.product_id == product_id:
                return product
        return None


@dataclass(frozen=True)
class KeywordRule:
    keywords: frozenset[str]
    action: str


@dataclass(frozen=True)
class KeywordRules:
    version: int
    rules: tuple[KeywordRule, ...]  # ordered; first full match wins
    fallback_action: str

    @property
    def vocabulary(self) -> frozenset[str]:
        vocab: set[str] = set()
        for rule in self.rules:
            vocab.update(rule.keywords)
        return frozenset(vocab)


@dataclass
class Manifest:
    root: Path
    name: str
    schema_version: int
    tasks: list[BenchmarkTask]
    kb: KnowledgeBase
    keyword_rules: KeywordRules
    error_labels: dict[str, dict]  # task_id -> {failure_mode, layer}
    by_id: dict[str, BenchmarkTask] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.by_id = {t.task_id: t for t in self.tasks}

    def media_bytes(self, ref: MediaRef) -> bytes:
        return (self.root / ref.path).read_bytes()


def score(action: str, task: BenchmarkTask) -> bool:
    """Exact match against the task's single gold action label."""
    return action == task.ground_truth


def load_keyword_rules(path: Path) -> tuple[KeywordRules, list[str]]:
    violations: list[str] = []
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        return KeywordRules(0, (), "escalate_to_specialist"), [f"keyword rules unreadable: {exc}"]
    if not isinstance(raw, dict):
        return KeywordRules(0, (), "escalate_to_specialist"), ["keyword rules must be a mapping"]
    rules: list[KeywordRule] = []
    for i, entry in enumerate(raw.get("rules", [])):
        keywords = entry.get("keywords", [])
        action = entry.get("action", "")
        if not keywords or not isinstance(keywords, list):
            violations.append(f"keyword rule #{i} has no keywords")
            continue
        if action not in ACTIONS:
            violations.append(f"keyword rule #{i} names unknown action {action!r}")
            continue
        rules.append(KeywordRule(frozenset(k.lower() for k in keywords), action))
    fallback = raw.get("fallback_action", "escalate_to_specialist")
    if fallback not in ACTIONS:
        violations.append(f"keyword fallback action {fallback!r} unknown")
    return KeywordRules(int(raw.get("version", 0)), tuple(rules), fallback), violations


def _parse_media_ref(raw: dict, where: str, violations: list[str]) -> Optional[MediaRef]:
    if not isinstance(raw, dict) or "file" not in raw:
        violations.append(f"{where}: media entry needs a 'file' path")
        return None
    text = raw.get("transcript", raw.get("caption", ""))
    if not text:
        violations.append(f"{where}: media entry needs a transcript/caption")
    return MediaRef(path=str(raw["file"]), text=str(text))


def _parse_task(raw: dict, violations: list[str]) -> Optional[BenchmarkTask]:
    task_id = raw.get("task_id")
    if not task_id:
        violations.append("task without a task_id")
        return None
    where = f"task {task_id}"
    category = raw.get("category")
    if category not in CATEGORIES:
        violations.append(f"{where}: unknown category {category!r}")
        return None
    channels = CATEGORY_CHANNELS[category]
    ground_truth = raw.get("ground_truth")
    if ground_truth not in ACTIONS:
        violations.append(f"{where}: ground_truth {ground_truth!r} is not one of the action labels")
    note = raw.get("note", "")
    if not note:
        violations.append(f"{where}: every task carries a text note")
    priority = raw.get("priority", 0)
    if not isinstance(priority, int) or priority < 0:
        violations.append(f"{where}: priority must be a non-negative integer")
        priority = 0

    media_raw = raw.get("media", {}) or {}
    voice = image = None
    extra_voice: list[MediaRef] = []
    extra_images: list[MediaRef] = []
    if "voice" in channels:
        if "voice" not in media_raw:
            violations.append(f"{where}: category {category} carries voice but no voice media given")
        else:
            voice = _parse_media_ref(media_raw["voice"], f"{where} voice", violations)
        for entry in media_raw.get("extra_voice", []):
            ref = _parse_media_ref(entry, f"{where} extra_voice", violations)
            if ref:
                extra_voice.append(ref)
    elif "voice" in media_raw:
        violations.append(f"{where}: category {category} does not carry voice media")
    if "image" in channels:
        if "image" not in media_raw:
            violations.append(f"{where}: category {category} carries image but no image media given")
        else:
            image = _parse_media_ref(media_raw["image"], f"{where} image", violations)
        for entry in media_raw.get("extra_images", []):
            ref = _parse_media_ref(entry, f"{where} extra_images", violations)
            if ref:
                extra_images.append(ref)
    elif "image" in media_raw:
        violations.append(f"{where}: category {category} does not carry image media")

    dispatch_raw = raw.get("dispatch", {}) or {}
    image_route = dispatch_raw.get("image_route", "vision")
    if image_route not in ("vision", "synthesis"):
        violations.append(f"{where}: image_route must be vision or synthesis")
        image_route = "vision"
    if image_route == "synthesis" and "image" not in channels:
        violations.append(f"{where}: image_route set but the category carries no image")
    context_with = tuple(dispatch_raw.get("text_context_with", []))
    for channel in context_with:
        if channel not in ("voice", "image"):
            violations.append(f"{where}: text_context_with names unknown channel {channel!r}")
        elif channel == "voice" and "voice" not in channels:
            violations.append(f"{where}: text_context_with voice, but no voice channel")
        elif channel == "image" and ("image" not in channels or image_route != "vision"):
            violations.append(
                f"{where}: text_context_with image requires a vision-routed image sub-task"
            )
    merge = bool(dispatch_raw.get("merge_evidence", False))
    analysis_count = (1 if "voice" in channels else 0) + (
        1 if ("image" in channels and image_route == "vision") else 0
    )
    if merge and analysis_count < 2:
        violations.append(f"{where}: merge_evidence needs at least two analysis sub-tasks")

    fixtures_raw = raw.get("fixtures", {}) or {}
    voice_summary = fixtures_raw.get("voice_summary")
    vision_summary = fixtures_raw.get("vision_summary")
    if "voice" in channels and not _has_both_grades(voice_summary):
        violations.append(f"{where}: voice_summary must give native and transcoded grades")
    if "image" in channels and image_route == "vision" and not _has_both_grades(vision_summary):
        violations.append(f"{where}: vision_summary must give native and transcoded grades")

    scripted: dict[str, FixtureDecision] = {}
    for key, entry in (fixtures_raw.get("scripted_decision", {}) or {}).items():
        action = entry.get("action")
        if action not in ACTIONS:
            violations.append(f"{where}: scripted decision for {key!r} has unknown action {action!r}")
            continue
        confidence = float(entry.get("confidence", 0.5))
        if not 0.0 <= confidence <= 1.0:
            violations.append(f"{where}: scripted confidence for {key!r} outside [0, 1]")
        scripted[key] = FixtureDecision(action, confidence, str(entry.get("rationale", "")))

    task = BenchmarkTask(
        task_id=str(task_id),
        category=category,
        priority=priority,
        ground_truth=str(ground_truth),
        note=str(note),
        kb_refs=tuple(raw.get("kb_refs", [])),
        voice=voice,
        image=image,
        extra_voice=tuple(extra_voice),
        extra_images=tuple(extra_images),
        dispatch=DispatchPlan(image_route, context_with, merge),
        fixtures=TaskFixtures(voice_summary, vision_summary, scripted),
    )
    missing = task.reachable_profiles() - set(scripted)
    if missing:
        violations.append(
            f"{where}: scripted_decision lacks reachable fidelity profiles {sorted(missing)}"
        )
    unexpected = set(scripted) - task.reachable_profiles()
    if unexpected:
        violations.append(
            f"{where}: scripted_decision has unreachable profile keys {sorted(unexpected)}"
        )
    return task


def _has_both_grades(summary: Optional[dict]) -> bool:
    return (
        isinstance(summary, dict)
        and bool(summary.get(FID_NATIVE))
        and bool(summary.get(FID_TRANSCODED))
    )


def _validate_media(manifest_root: Path, task: BenchmarkTask, violations: list[str]) -> None:
    refs = []
    if task.voice:
        refs.extend((r, "transcript", media_mod.extract_wav_transcript)
                    for r in (task.voice, *task.extra_voice))
    if task.image:
        refs.extend((r, "caption", media_mod.extract_png_caption)
                    for r in (task.image, *task.extra_images))
    for ref, label, extractor in refs:
        target = manifest_root / ref.path
        if not target.is_file():
            violations.append(f"task {task.task_id}: media file missing: {ref.path}")
            continue
        embedded = extractor(target.read_bytes())
        if embedded != ref.text:
            violations.append(
                f"task {task.task_id}: embedded {label} in {ref.path} does not match the manifest"
            )


def _parse_kb(raw: dict, violations: list[str]) -> KnowledgeBase:
    products: list[Product] = []
    seen_ids: set[str] = set()
    for entry in raw.get("products", []) or []:
        pid = entry.get("product_id", "")
        if not pid or pid in seen_ids:
            violations.append(f"kb product with missing or duplicate id: {pid!r}")
            continue
        seen_ids.add(pid)
        products.append(
            Product(
                product_id=pid,
                name=str(entry.get("name", "")),
                warranty_terms=str(entry.get("warranty_terms", "")),
                exclusions=tuple(entry.get("exclusions", [])),
            )
        )
    troubleshooting: list[TroubleshootingEntry] = []
    for entry in raw.get("troubleshooting", []) or []:
        action = entry.get("resolution_action", "")
        if action not in ACTIONS:
            violations.append(f"kb troubleshooting entry names unknown action {action!r}")
            continue
        troubleshooting.append(
            TroubleshootingEntry(
                symptom=str(entry.get("symptom", "")),
                resolution_action=action,
                note=str(entry.get("note", "")),
            )
        )
    if len(products) != EXPECTED_PRODUCT_COUNT:
        violations.append(
            f"kb must list exactly {EXPECTED_PRODUCT_COUNT} products, found {len(products)}"
        )
    if len(troubleshooting) != EXPECTED_TROUBLESHOOTING_COUNT:
        violations.append(
            f"kb must list exactly {EXPECTED_TROUBLESHOOTING_COUNT} troubleshooting entries, "
            f"found {len(troubleshooting)}"
        )
    return KnowledgeBase(products, troubleshooting)


def load_manifest(path: Union[str, Path]) -> Manifest:
    """Parse and fully validate a benchmark bundle.

    Raises ManifestParseError for unreadable files and
    ManifestValidationError listing every semantic violation found.
    """
    manifest_path = Path(path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.yaml"
    try:
        raw = yaml.safe_load(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestParseError(f"cannot read manifest: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ManifestParseError(f"manifest is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestParseError("manifest must be a YAML mapping")
    root = manifest_path.parent

    violations: list[str] = []
    if raw.get("schema_version") != SCHEMA_VERSION:
        violations.append(
            f"schema_version must be {SCHEMA_VERSION}, found {raw.get('schema_version')!r}"
        )

    tasks: list[BenchmarkTask] = []
    seen: set[str] = set()
    for task_raw in raw.get("tasks", []) or []:
        task = _parse_task(task_raw, violations)
        if task is None:
            continue
        if task.task_id in seen:
            violations.append(f"duplicate task_id {task.task_id}")
            continue
        seen.add(task.task_id)
        tasks.append(task)

    counts = {c: 0 for c in CATEGORIES}
    for task in tasks:
        counts[task.category] += 1
    for category, expected in EXPECTED_TASK_COUNTS.items():
        if counts[category] != expected:
            violations.append(
                f"category {category} must have {expected} tasks, found {counts[category]}"
            )

    kb = _parse_kb(raw.get("kb", {}) or {}, violations)
    product_ids = {p.product_id for p in kb.products}
    for task in tasks:
        for ref in task.kb_refs:
            if ref not in product_ids:
                violations.append(f"task {task.task_id}: kb_refs names unknown product {ref!r}")
        _validate_media(root, task, violations)

    rules_rel = raw.get("keyword_rules")
    if not rules_rel:
        violations.append("manifest must point at a keyword_rules file")
        keyword_rules = KeywordRules(0, (), "escalate_to_specialist")
    else:
        keyword_rules, rule_violations = load_keyword_rules(root / str(rules_rel))
        violations.extend(rule_violations)

    error_labels: dict[str, dict] = {}
    labels_rel = raw.get("error_labels")
    if labels_rel:
        labels_path = root / str(labels_rel)
        if not labels_path.is_file():
            violations.append(f"error_labels file missing: {labels_rel}")
        else:
            loaded = yaml.safe_load(labels_path.read_text(encoding="utf-8")) or {}
            for task_id, entry in loaded.items():
                if task_id not in seen:
                    violations.append(f"error_labels names unknown task {task_id}")
                else:
                    error_labels[task_id] = dict(entry)

    if violations:
        raise ManifestValidationError(violations)

    return Manifest(
        root=root,
        name=str(raw.get("name", "benchmark")),
        schema_version=SCHEMA_VERSION,
        tasks=tasks,
        kb=kb,
        keyword_rules=keyword_rules,
        error_labels=error_labels,
    )
