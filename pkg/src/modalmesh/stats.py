"""Statistics over paired run logs.

Everything here is a pure function of the run logs plus an explicit seed:
accuracy, the paired contingency table, McNemar's exact test, the paired
bootstrap interval, the paired t-test on latencies, and the report renderer.
Same logs + same seed always produce byte-identical report JSON.

Conventions, pinned so reports are reproducible bit for bit:
- McNemar is the two-sided exact binomial test, doubled smaller tail capped
  at 1.0, computed in exact rational arithmetic before the final float.
- Bootstrap uses the percentile method over `numpy.random.default_rng(seed)`.
- Medians use lower interpolation; spreads are sample standard deviations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import stats as _scipy_stats


class StatsInputError(ValueError):
    pass


@dataclass(frozen=True)
class PairedOutcome:
    """One benchmark task observed under both arms."""

    task_id: str
    category: str
    baseline_correct: bool
    treatment_correct: bool
    baseline_latency: float
    treatment_latency: float


@dataclass(frozen=True)
class ContingencyTable:
    """Paired 2x2 counts: a both-correct, b treatment-only, c baseline-only,
    d both-wrong."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.c, self.d) < 0:
            raise StatsInputError("contingency counts must be non-negative")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[PairedOutcome]) -> "ContingencyTable":
        a = b = c = d = 0
        for o in outcomes:
            if o.treatment_correct and o.baseline_correct:
                a += 1
            elif o.treatment_correct:
                b += 1
            elif o.baseline_correct:
                c += 1
            else:
                d += 1
        return cls(a, b, c, d)


def tca(outcomes: Sequence[PairedOutcome], arm: str) -> float:
    """Task completion accuracy: exact-match correct fraction for one arm."""
    if not outcomes:
        raise StatsInputError("tca needs at least one outcome")
    if arm == "treatment":
        correct = sum(o.treatment_correct for o in outcomes)
    elif arm == "baseline":
        correct = sum(o.baseline_correct for o in outcomes)
    else:
        raise StatsInputError(f"arm must be treatment or baseline, not {arm!r}")
    return correct / len(outcomes)


def mcnemar_exact(table: ContingencyTable) -> float:
    """Two-sided exact McNemar p-value over the discordant pairs.

    p = 2 * sum_{i=0}^{min(b,c)} C(b+c, i) / 2^(b+c), capped at 1.0.
    With no discordant pairs the test is degenerate and p is defined as 1.0.
    """
    n = table.b + table.c
    if n == 0:
        return 1.0
    k = min(table.b, table.c)
    tail = sum(math.comb(n, i) for i in range(k + 1))
    p = 2 * Fraction(tail, 2 ** n)
    return float(min(p, Fraction(1)))


def bootstrap_ci(outcomes: Sequence[PairedOutcome], resamples: int = 10_000,
                 seed: Optional[int] = None,
                 confidence: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap CI for the TCA difference, in percentage points."""
    if not outcomes:
        raise StatsInputError("bootstrap needs at least one outcome")
    if seed is None:
        raise StatsInputError("bootstrap requires an explicit seed")
    deltas = np.array(
        [int(o.treatment_correct) - int(o.baseline_correct) for o in outcomes],
        dtype=np.float64,
    )
    rng = np.random.default_rng(seed)
    n = len(deltas)
    indices = rng.integers(0, n, size=(resamples, n))
    resampled = deltas[indices].mean(axis=1) * 100.0
    alpha = (1.0 - confidence) / 2.0
    lo, hi = np.percentile(resampled, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return float(lo), float(hi)


def paired_t(latencies_baseline: Sequence[float],
             latencies_treatment: Sequence[float]) -> tuple[float, float]:
    """Paired t on per-task differences (baseline minus treatment).

    A slower treatment arm therefore gives a negative t statistic.
    """
    if len(latencies_baseline) != len(latencies_treatment):
        raise StatsInputError("paired t needs equal-length latency vectors")
    n = len(latencies_baseline)
    if n < 2:
        raise StatsInputError("paired t needs at least two pairs")
    diffs = np.asarray(latencies_baseline, dtype=np.float64) - np.asarray(
        latencies_treatment, dtype=np.float64)
    sd = diffs.std(ddof=1)
    if sd == 0.0:
        raise StatsInputError("zero variance in latency differences")
    t = float(diffs.mean() / (sd / math.sqrt(n)))
    p = float(2.0 * _scipy_stats.t.sf(abs(t), df=n - 1))
    return t, p


def latency_summary(values: Sequence[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return {"mean": 0.0, "median": 0.0, "stddev": 0.0}
    stddev = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {
        "mean": float(arr.mean()),
        "median": float(np.percentile(arr, 50.0, method="lower")),
        "stddev": stddev,
    }


# --- report assembly ------------------------------------------------------------


@dataclass
class ReportBundle:
    """Everything the report renders; one source of numeric truth."""

    backend: str
    treatment_mode: str
    baseline_mode: str
    seed: int
    resamples: int
    outcomes: list[PairedOutcome]
    routing_profiles: dict[str, dict] = field(default_factory=dict)
    error_labels: dict[str, dict] = field(default_factory=dict)

    # derived on build()
    payload: dict = field(default_factory=dict)

    def build(self) -> "ReportBundle":
        outcomes = self.outcomes
        table = ContingencyTable.from_outcomes(outcomes)
        tca_treatment = tca(outcomes, "treatment")
        tca_baseline = tca(outcomes, "baseline")
        categories = sorted({o.category for o in outcomes})
        per_category = {}
        for category in categories:
            subset = [o for o in outcomes if o.category == category]
            per_category[category] = {
                "n": len(subset),
                "treatment_correct": sum(o.treatment_correct for o in subset),
                "baseline_correct": sum(o.baseline_correct for o in subset),
                "treatment_latency": latency_summary(
                    [o.treatment_latency for o in subset]),
                "baseline_latency": latency_summary(
                    [o.baseline_latency for o in subset]),
            }
        treatment_latencies = [o.treatment_latency for o in outcomes]
        baseline_latencies = [o.baseline_latency for o in outcomes]
        try:
            t_stat, t_p = paired_t(baseline_latencies, treatment_latencies)
        except StatsInputError:
            t_stat, t_p = float("nan"), float("nan")
        lo, hi = bootstrap_ci(outcomes, resamples=self.resamples, seed=self.seed)
        degenerate = (table.b + table.c) == 0
        self.payload = {
            "backend": self.backend,
            "arms": {"treatment": self.treatment_mode, "baseline": self.baseline_mode},
            "n_tasks": len(outcomes),
            "tca": {
                "treatment": tca_treatment,
                "baseline": tca_baseline,
                "delta_pp": (tca_treatment - tca_baseline) * 100.0,
            },
            "contingency": {"both_correct": table.a, "treatment_only": table.b,
                            "baseline_only": table.c, "both_wrong": table.d},
            "mcnemar": {"p_value": mcnemar_exact(table), "degenerate": degenerate},
            "bootstrap": {"lo_pp": lo, "hi_pp": hi, "resamples": self.resamples,
                          "seed": self.seed, "confidence": 0.95},
            "latency_seconds": {
                "treatment": latency_summary(treatment_latencies),
                "baseline": latency_summary(baseline_latencies),
                "paired_t": {"t": t_stat, "p": t_p},
            },
            "per_category": per_category,
            "routing_profiles": self.routing_profiles,
            "error_modes": tabulate_error_labels(self.error_labels, outcomes),
        }
        return self


def tabulate_error_labels(labels: dict[str, dict],
                          outcomes: Sequence[PairedOutcome]) -> list[dict]:
    """Group operator-supplied failure labels; flag drift from observed failures."""
    if not labels:
        return []
    failures = {o.task_id for o in outcomes if not o.treatment_correct}
    grouped: dict[tuple[str, str], list[str]] = {}
    for task_id, entry in labels.items():
        key = (entry["failure_mode"], entry.get("layer", "unspecified"))
        grouped.setdefault(key, []).append(task_id)
    rows = []
    for (mode, layer), task_ids in grouped.items():
        task_ids.sort()
        rows.append({
            "failure_mode": mode,
            "layer": layer,
            "count": len(task_ids),
            "task_ids": task_ids,
            "all_failed_in_treatment": all(t in failures for t in task_ids),
        })
    rows.sort(key=lambda r: (-r["count"], r["failure_mode"]))
    return rows


def _fmt(value: float, digits: int = 1) -> str:
    return f"{value:.{digits}f}"


def render_report(bundle: ReportBundle) -> tuple[str, dict]:
    """Markdown plus JSON payload; every markdown number comes from the payload."""
    if not bundle.payload:
        bundle.build()
    p = bundle.payload
    lines = []
    lines.append("# Paired routing experiment report")
    lines.append("")
    lines.append(f"Backend: `{p['backend']}`, treatment arm `{p['arms']['treatment']}`"
                 f" vs baseline arm `{p['arms']['baseline']}` over {p['n_tasks']} tasks.")
    lines.append("")
    lines.append("## Accuracy")
    lines.append("")
    lines.append("| Arm | TCA |")
    lines.append("| --- | --- |")
    lines.append(f"| treatment ({p['arms']['treatment']}) | "
                 f"{_fmt(p['tca']['treatment'] * 100)}% |")
    lines.append(f"| baseline ({p['arms']['baseline']}) | "
                 f"{_fmt(p['tca']['baseline'] * 100)}% |")
    lines.append("")
    lines.append(f"Delta: {_fmt(p['tca']['delta_pp'])} pp.")
    cont = p["contingency"]
    lines.append("")
    lines.append(f"Paired table: both correct {cont['both_correct']}, "
                 f"treatment only {cont['treatment_only']}, "
                 f"baseline only {cont['baseline_only']}, "
                 f"both wrong {cont['both_wrong']}.")
    mcn = p["mcnemar"]
    mcn_note = " (degenerate: no discordant pairs)" if mcn["degenerate"] else ""
    lines.append(f"McNemar exact p = {_fmt(mcn['p_value'], 3)}{mcn_note}. "
                 f"Bootstrap {p['bootstrap']['confidence']:.0%} CI for the delta: "
                 f"[{_fmt(p['bootstrap']['lo_pp'])}, {_fmt(p['bootstrap']['hi_pp'])}] pp "
                 f"({p['bootstrap']['resamples']} resamples, seed {p['bootstrap']['seed']}).")
    lines.append("")
    lines.append("## Per-category correct counts")
    lines.append("")
    lines.append("| Category | n | treatment | baseline |")
    lines.append("| --- | --- | --- | --- |")
    for category, row in p["per_category"].items():
        lines.append(f"| {category} | {row['n']} | {row['treatment_correct']} | "
                     f"{row['baseline_correct']} |")
    lines.append("")
    lines.append("## Latency (seconds)")
    lines.append("")
    lines.append("| Arm | mean | median | stddev |")
    lines.append("| --- | --- | --- | --- |")
    for arm in ("treatment", "baseline"):
        row = p["latency_seconds"][arm]
        lines.append(f"| {arm} | {_fmt(row['mean'], 4)} | {_fmt(row['median'], 4)} | "
                     f"{_fmt(row['stddev'], 4)} |")
    t_row = p["latency_seconds"]["paired_t"]
    lines.append("")
    lines.append(f"Paired t on per-task latency differences (baseline minus "
                 f"treatment): t = {_fmt(t_row['t'], 2)}, p = {_fmt(t_row['p'], 6)}.")
    lines.append("")
    lines.append("| Category | arm | mean | median | stddev |")
    lines.append("| --- | --- | --- | --- | --- |")
    for category, row in p["per_category"].items():
        for arm in ("treatment", "baseline"):
            latency = row[f"{arm}_latency"]
            lines.append(f"| {category} | {arm} | {_fmt(latency['mean'], 4)} | "
                         f"{_fmt(latency['median'], 4)} | {_fmt(latency['stddev'], 4)} |")
    if p["routing_profiles"]:
        lines.append("")
        lines.append("## Routing profile (native vs transcoded decisions)")
        lines.append("")
        lines.append("| Arm | modality | native | transcoded |")
        lines.append("| --- | --- | --- | --- |")
        for arm, profile in p["routing_profiles"].items():
            for modality, counts in profile.items():
                total = counts["native"] + counts["transcoded"]
                share = (100.0 * counts["native"] / total) if total else 0.0
                lines.append(f"| {arm} | {modality} | {counts['native']} "
                             f"({_fmt(share)}%) | {counts['transcoded']} |")
    if p["error_modes"]:
        lines.append("")
        lines.append("## Labeled failure modes (operator-supplied)")
        lines.append("")
        lines.append("| Failure mode | layer | count |")
        lines.append("| --- | --- | --- |")
        for row in p["error_modes"]:
            lines.append(f"| {row['failure_mode']} | {row['layer']} | {row['count']} |")
    lines.append("")
    return "\n".join(lines), p


def write_report(bundle: ReportBundle, out_dir: Union[str, Path]) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    markdown, payload = render_report(bundle)
    md_path = out / "report.md"
    json_path = out / "report.json"
    md_path.write_text(markdown, encoding="utf-8")
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    return md_path, json_path


# --- run-log plumbing ---------------------------------------------------------


def read_runlog(path: Union[str, Path]) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def outcomes_from_runlogs(treatment_rows: Iterable[dict],
                          baseline_rows: Iterable[dict]) -> list[PairedOutcome]:
    """Zip two arm logs into paired outcomes; arms must cover identical tasks.

    Treatment row order is preserved so recomputed statistics sum in the same
    order as the original run and reproduce its floats exactly.
    """
    treatment = list(treatment_rows)
    baseline = {row["task_id"]: row for row in baseline_rows}
    treatment_ids = [row["task_id"] for row in treatment]
    if len(set(treatment_ids)) != len(treatment_ids):
        raise StatsInputError("arm-mismatch: duplicate task ids in treatment log")
    if set(treatment_ids) != set(baseline):
        missing = set(treatment_ids) ^ set(baseline)
        raise StatsInputError(f"arm-mismatch: task sets differ on {sorted(missing)}")
    outcomes = []
    for t_row in treatment:
        task_id = t_row["task_id"]
        b_row = baseline[task_id]
        if t_row.get("category") != b_row.get("category"):
            raise StatsInputError(f"arm-mismatch: category differs for {task_id}")
        outcomes.append(PairedOutcome(
            task_id=task_id,
            category=t_row["category"],
            baseline_correct=bool(b_row["correct"]),
            treatment_correct=bool(t_row["correct"]),
            baseline_latency=float(b_row["e2e_latency_s"]),
            treatment_latency=float(t_row["e2e_latency_s"]),
        ))
    return outcomes
