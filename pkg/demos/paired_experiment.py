"""
Paired routing experiment over the full benchmark
=================================================

Runs all 50 tasks twice over one mesh (native routing, then the text
bottleneck), pairs the arms task by task, and prints the headline
statistics. Writes run logs and the rendered report to ./demo_run.
"""

from pathlib import Path

from modalmesh import (
    ReportBundle,
    load_manifest,
    render_report,
    run_paired_experiment,
    start_mesh,
    write_report,
)

BUNDLE = Path(__file__).resolve().parent.parent / "data" / "benchmark"
OUT = Path(__file__).resolve().parent / "demo_run"

manifest = load_manifest(BUNDLE / "manifest.yaml")

# One mesh serves both arms; the router is reconfigured between them, so
# every task sees byte-identical inputs under both policies.
with start_mesh(manifest, backend="scripted") as mesh:
    result = run_paired_experiment(mesh, out_dir=OUT)

bundle = ReportBundle(
    backend="scripted",
    treatment_mode=result.treatment_mode,
    baseline_mode=result.baseline_mode,
    seed=42,
    resamples=10_000,
    outcomes=result.outcomes,
    routing_profiles=result.routing_profiles,
    error_labels=manifest.error_labels,
).build()

markdown, payload = render_report(bundle)
write_report(bundle, OUT)

print(f"treatment TCA : {payload['tca']['treatment']:.1%}")
print(f"baseline TCA  : {payload['tca']['baseline']:.1%}")
print(f"delta         : {payload['tca']['delta_pp']:+.1f} pp")
cont = payload["contingency"]
print(f"discordant    : {cont['treatment_only']} treatment-only vs "
      f"{cont['baseline_only']} baseline-only")
print(f"mcnemar p     : {payload['mcnemar']['p_value']:.4f}")
print(f"bootstrap CI  : [{payload['bootstrap']['lo_pp']:.1f}, "
      f"{payload['bootstrap']['hi_pp']:.1f}] pp (seed 42)")
print(f"\nfull report: {OUT / 'report.md'}")
