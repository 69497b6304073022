"""
One audio clip under three routing policies
===========================================

The router looks at each part, the destination agent's declared input
modes, and the active policy, then either forwards the part untouched or
replaces it with a transcoded text stand-in.
"""

from modalmesh import RoutingMode, build_wav, route_part
from modalmesh.protocol import FilePart

clip = FilePart("audio/wav", data=build_wav("the unit shows error code E4"),
                name="complaint.wav")

# A voice-capable destination under the native policy: the part passes as-is.
delivered, decision = route_part(
    clip, capabilities=["audio/wav", "audio/webm"], mode=RoutingMode.NATIVE,
    task_id="demo", destination="voice-agent")
print("native + capable :", decision.outcome.value, "| part is clip:",
      delivered is clip)

# The same clip to a text-only destination: native mode still has to
# transcode, because the receiver cannot decode audio at all.
delivered, decision = route_part(
    clip, capabilities=["text/plain"], mode=RoutingMode.NATIVE,
    task_id="demo", destination="text-agent")
print("native + incapable:", decision.outcome.value, "via",
      decision.transcoder_used)
print("  stand-in:", delivered.text)

# The text-bottleneck policy transcodes media regardless of capability.
delivered, decision = route_part(
    clip, capabilities=["audio/wav"], mode=RoutingMode.TEXT_BOTTLENECK,
    task_id="demo", destination="voice-agent")
print("bottleneck        :", decision.outcome.value, "via",
      decision.transcoder_used)

# Adaptive routing keeps media native only above a priority threshold.
for priority in (1, 3):
    delivered, decision = route_part(
        clip, capabilities=["audio/wav"], mode=RoutingMode.ADAPTIVE,
        task_id="demo", destination="voice-agent", theta=2.0,
        priority=priority)
    print(f"adaptive p={priority}      :", decision.outcome.value)

# Bytes with no recoverable transcript still produce a usable placeholder,
# so downstream agents see what was lost instead of a decode error.
noise = FilePart("audio/wav", data=b"\x00\x01\x02 not a wav file")
delivered, _ = route_part(noise, capabilities=[], mode=RoutingMode.NATIVE,
                          task_id="demo", destination="text-agent")
print("garbage audio     :", delivered.text)
