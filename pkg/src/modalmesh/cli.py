"""Command-line entry points: serve a mesh, run experiments, render reports.

Exit codes: 0 when the requested run completes (regardless of how accurate
either arm was), 2 for configuration or manifest problems, 3 for runtime
failures such as unreachable agents or a diverged paired run.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .agents import BackendError
from .benchmark import (
    CATEGORIES,
    Manifest,
    ManifestParseError,
    ManifestValidationError,
    load_manifest,
)
from .config import DELAYS_OFF, ConfigError, RunConfig, build_config
from .httpd import BindError, TransportCallError
from .mesh import make_backend, start_mesh
from .orchestrator import (
    ExperimentResult,
    OrchestrationError,
    PairingError,
    run_paired_experiment,
)
from .routing import RoutingMode, TelemetryLog, routing_profile
from .stats import (
    ReportBundle,
    outcomes_from_runlogs,
    read_runlog,
    write_report,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

BOOTSTRAP_RESAMPLES = 10_000

# ValueError covers backend construction problems (e.g. llm without endpoint).
_CONFIG_ERRORS = (ConfigError, ManifestParseError, ManifestValidationError, ValueError)
_RUNTIME_ERRORS = (OrchestrationError, PairingError, BackendError, BindError,
                   TransportCallError, OSError)


def _timestamped_out(explicit: Optional[str], kind: str) -> Path:
    if explicit:
        out = Path(explicit)
    else:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        out = Path("runs") / f"{stamp}-{kind}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_manifest_or_fail(config: RunConfig) -> Manifest:
    if not config.manifest:
        raise ConfigError("a benchmark manifest is required (--manifest or config file)")
    return load_manifest(config.manifest)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    flags = {
        "manifest": getattr(args, "manifest", None),
        "backend": getattr(args, "backend", None),
        "mode": getattr(args, "mode", None),
        "baseline_mode": getattr(args, "baseline_mode", None),
        "theta": getattr(args, "theta", None),
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "simulated_delays": getattr(args, "delay_profile", None),
        "parallel_subtasks": getattr(args, "parallel_subtasks", None),
    }
    return build_config(args.config, **flags)


def _progress_printer(arm: str, i: int, n: int, result) -> None:
    log.info("%s %d/%d %s -> %s (%s)", arm, i, n, result.task_id,
             result.decision.action, "ok" if result.correct else "miss")


# --- subcommands -----------------------------------------------------------------


def cmd_validate_manifest(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    manifest = _load_manifest_or_fail(config)
    counts = {c: 0 for c in CATEGORIES}
    for task in manifest.tasks:
        counts[task.category] += 1
    print(f"manifest ok: {manifest.name!r} at {manifest.root}")
    print(f"  tasks: {len(manifest.tasks)} "
          f"({', '.join(f'{c}={n}' for c, n in counts.items())})")
    print(f"  kb: {len(manifest.kb.products)} products, "
          f"{len(manifest.kb.troubleshooting)} troubleshooting entries")
    print(f"  keyword rules: {len(manifest.keyword_rules.rules)} "
          f"(fallback {manifest.keyword_rules.fallback_action})")
    print(f"  error labels: {len(manifest.error_labels)}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    manifest = _load_manifest_or_fail(config)
    mesh = start_mesh(
        manifest,
        backend=config.backend,
        mode=RoutingMode(config.mode),
        theta=config.theta,
        delay_profile=config.delay_profile(),
        host=args.host,
    )
    try:
        print(json.dumps({"router": mesh.router_url, "agents": mesh.agent_urls,
                          "mode": config.mode, "backend": config.backend}))
        sys.stdout.flush()
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        mesh.shutdown()
    return EXIT_OK


def _run_experiment(config: RunConfig, manifest: Manifest,
                    out: Path) -> ExperimentResult:
    modes = (RoutingMode(config.mode), RoutingMode(config.baseline_mode))
    if modes[0] is modes[1]:
        raise ConfigError("treatment and baseline modes must differ")
    with start_mesh(manifest, backend=config.backend, mode=modes[0],
                    theta=config.theta,
                    delay_profile=config.delay_profile()) as mesh:
        return run_paired_experiment(
            mesh, modes=modes, theta=config.theta, out_dir=out,
            parallel_subtasks=config.parallel_subtasks,
            progress=_progress_printer,
        )


def _write_run_meta(config: RunConfig, out: Path) -> None:
    meta = {
        "treatment_mode": config.mode,
        "baseline_mode": config.baseline_mode,
        "backend": config.backend,
        "seed": config.seed,
        "theta": config.theta,
        "manifest": str(Path(config.manifest).resolve()),
        "simulated_delays": config.simulated_delays,
        "parallel_subtasks": config.parallel_subtasks,
        "started_at": datetime.now(timezone.utc).isoformat(),
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")


def cmd_experiment(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.seed is None:
        raise ConfigError("the experiment bootstraps a confidence interval; "
                          "--seed is required for a reproducible run")
    manifest = _load_manifest_or_fail(config)
    out = _timestamped_out(config.out, "experiment")
    _write_run_meta(config, out)
    result = _run_experiment(config, manifest, out)
    bundle = ReportBundle(
        backend=config.backend,
        treatment_mode=result.treatment_mode,
        baseline_mode=result.baseline_mode,
        seed=config.seed,
        resamples=BOOTSTRAP_RESAMPLES,
        outcomes=result.outcomes,
        routing_profiles=result.routing_profiles,
        error_labels=manifest.error_labels,
    ).build()
    md_path, json_path = write_report(bundle, out)
    p = bundle.payload
    print(f"tasks: {p['n_tasks']}  "
          f"treatment TCA {p['tca']['treatment']:.1%}  "
          f"baseline TCA {p['tca']['baseline']:.1%}  "
          f"delta {p['tca']['delta_pp']:+.1f} pp")
    print(f"mcnemar p {p['mcnemar']['p_value']:.3f}  bootstrap CI "
          f"[{p['bootstrap']['lo_pp']:.1f}, {p['bootstrap']['hi_pp']:.1f}] pp")
    print(f"report: {md_path} and {json_path}")
    return EXIT_OK


def cmd_ablation(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    manifest = _load_manifest_or_fail(config)
    out = _timestamped_out(config.out, "ablation")
    modes = (RoutingMode(config.mode), RoutingMode(config.baseline_mode))
    if modes[0] is modes[1]:
        raise ConfigError("treatment and baseline modes must differ")

    grid: dict[str, dict] = {}
    with start_mesh(manifest, backend="scripted", mode=modes[0],
                    theta=config.theta,
                    delay_profile=config.delay_profile()) as mesh:
        for backend_name in ("keyword", "scripted"):
            mesh.set_backend(make_backend(backend_name, manifest))
            result = run_paired_experiment(
                mesh, modes=modes, theta=config.theta,
                out_dir=out / backend_name,
                parallel_subtasks=config.parallel_subtasks,
                progress=_progress_printer,
            )
            treatment = result.results[result.treatment_mode]
            baseline = result.results[result.baseline_mode]
            identical = sum(
                t.decision.action == b.decision.action
                for t, b in zip(treatment, baseline)
            )
            grid[backend_name] = {
                result.treatment_mode: sum(r.correct for r in treatment),
                result.baseline_mode: sum(r.correct for r in baseline),
                "n": len(treatment),
                "identical_actions": identical,
                "identical_rate": identical / len(treatment),
            }

    payload = {"modes": [m.value for m in modes], "grid": grid}
    (out / "ablation.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    lines = ["# Synthesis backend x routing mode ablation", "",
             f"| Backend | {modes[0].value} correct | {modes[1].value} correct "
             f"| identical actions |",
             "| --- | --- | --- | --- |"]
    for backend_name, row in grid.items():
        lines.append(
            f"| {backend_name} | {row[modes[0].value]}/{row['n']} "
            f"| {row[modes[1].value]}/{row['n']} "
            f"| {row['identical_actions']}/{row['n']} |")
    (out / "ablation.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for line in lines[2:]:
        print(line)
    print(f"ablation artifacts: {out}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    meta_path = run_dir / "run_meta.json"
    if not meta_path.is_file():
        raise ConfigError(f"{run_dir} does not look like a run directory "
                          f"(missing run_meta.json)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    seed = args.seed if args.seed is not None else meta.get("seed")
    if seed is None:
        raise ConfigError("no seed in run_meta.json; pass --seed")
    treatment_mode = meta["treatment_mode"]
    baseline_mode = meta["baseline_mode"]

    def arm_rows(mode: str) -> list[dict]:
        path = run_dir / f"runlog_{mode}.jsonl"
        if not path.is_file():
            raise ConfigError(f"missing run log {path}")
        return read_runlog(path)

    outcomes = outcomes_from_runlogs(arm_rows(treatment_mode), arm_rows(baseline_mode))

    profiles = {}
    for label, mode in (("treatment", treatment_mode), ("baseline", baseline_mode)):
        telemetry_path = run_dir / f"telemetry_{mode}.jsonl"
        if telemetry_path.is_file():
            profiles[label] = routing_profile(TelemetryLog.read(telemetry_path))

    error_labels: dict[str, dict] = {}
    manifest_path = meta.get("manifest")
    if manifest_path and Path(manifest_path).exists():
        try:
            error_labels = load_manifest(manifest_path).error_labels
        except (ManifestParseError, ManifestValidationError) as exc:
            log.warning("manifest at %s no longer loads (%s); "
                        "report omits failure-mode labels", manifest_path, exc)

    bundle = ReportBundle(
        backend=meta.get("backend", "unknown"),
        treatment_mode=treatment_mode,
        baseline_mode=baseline_mode,
        seed=int(seed),
        resamples=BOOTSTRAP_RESAMPLES,
        outcomes=outcomes,
        routing_profiles=profiles,
        error_labels=error_labels,
    ).build()
    out = Path(args.out) if args.out else run_dir
    md_path, json_path = write_report(bundle, out)
    print(f"report rebuilt: {md_path} and {json_path}")
    return EXIT_OK


# --- argument parsing --------------------------------------------------------------


def _add_common_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", help="benchmark bundle directory or manifest.yaml")
    parser.add_argument("--backend", choices=("keyword", "scripted", "llm"),
                        help="synthesis backend (default scripted)")
    parser.add_argument("--mode", choices=[m.value for m in RoutingMode],
                        help="routing mode (treatment arm for paired runs)")
    parser.add_argument("--baseline-mode", choices=[m.value for m in RoutingMode],
                        help="baseline arm routing mode (default text_bottleneck)")
    parser.add_argument("--theta", type=float,
                        help="priority threshold for adaptive mode")
    parser.add_argument("--delay-profile",
                        help=f"simulated delay profile name, or {DELAYS_OFF!r}")
    parser.add_argument("--parallel-subtasks", action=argparse.BooleanOptionalAction,
                        default=None, help="fan analysis sub-tasks out in parallel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modalmesh",
        description="Multimodal agent mesh: routing, benchmark runs, reports.")
    parser.add_argument("--config", help="YAML config file (flags win over it)")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log per-task progress")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the agents and router until interrupted")
    _add_common_run_flags(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(func=cmd_serve)

    experiment = sub.add_parser("experiment",
                                help="paired two-arm run with a full report")
    _add_common_run_flags(experiment)
    experiment.add_argument("--seed", type=int, help="bootstrap RNG seed (required)")
    experiment.add_argument("--out", help="output directory (default runs/<stamp>)")
    experiment.set_defaults(func=cmd_experiment)

    ablation = sub.add_parser("ablation",
                              help="keyword-vs-scripted backend grid over both arms")
    _add_common_run_flags(ablation)
    ablation.add_argument("--seed", type=int, help="recorded in outputs only")
    ablation.add_argument("--out", help="output directory (default runs/<stamp>)")
    ablation.set_defaults(func=cmd_ablation)

    validate = sub.add_parser("validate-manifest",
                              help="load a benchmark bundle and report its shape")
    validate.add_argument("--manifest", help="bundle directory or manifest.yaml")
    validate.set_defaults(func=cmd_validate_manifest)

    report = sub.add_parser("report", help="recompute report.md/json from run logs")
    report.add_argument("run_dir", help="experiment output directory")
    report.add_argument("--seed", type=int, help="override the recorded seed")
    report.add_argument("--out", help="write the report elsewhere")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
