"""
A task's journey through a live mesh
====================================

Brings up the three agents plus the router on localhost, then follows one
benchmark task end to end: card discovery, the voice analysis hop, and the
final synthesis decision.
"""

from pathlib import Path

import httpx

from modalmesh import RoutingMode, load_manifest, start_mesh
from modalmesh.agents import decode_evidence
from modalmesh.httpd import post_rpc
from modalmesh.orchestrator import Orchestrator

BUNDLE = Path(__file__).resolve().parent.parent / "data" / "benchmark"

manifest = load_manifest(BUNDLE / "manifest.yaml")
task = manifest.by_id["warranty_001"]
print("task:", task.task_id, "-", task.note[:70], "...")

with start_mesh(manifest, backend="scripted") as mesh:
    # Every agent self-describes at a well-known path; the router's registry
    # caches these cards and routes against their declared input modes.
    card = httpx.get(mesh.agent_urls["voice"]
                     + "/.well-known/agent-card.json").json()
    print("voice agent accepts:", card["skills"][0]["inputModes"])

    mesh.configure_arm(RoutingMode.NATIVE)
    result = Orchestrator(mesh).execute(task)

    print("\nevidence the synthesis agent saw:")
    for text in result.evidence_texts:
        for record in decode_evidence(text):
            print(f"  [{record.channel}/{record.fidelity}] "
                  f"{record.summary[:70]}")

    print("\ndecision:", result.decision.action,
          f"(confidence {result.decision.confidence:.2f})")
    print("ground truth:", task.ground_truth, "->",
          "correct" if result.correct else "wrong")

    # Completed sub-tasks stay queryable on their agents.
    record = post_rpc(mesh.agent_urls["text"], "tasks/get",
                      {"id": f"{task.task_id}.synthesis"}, "probe").result
    print("synthesis task state:", record["state"])

    # The router kept a per-part routing log for this task.
    print("\nrouting decisions:")
    for decision in mesh.router_service.decisions(task_prefix=task.task_id):
        print(f"  {decision.part_modality.value:5s} -> "
              f"{decision.destination_agent}: {decision.outcome.value}")
