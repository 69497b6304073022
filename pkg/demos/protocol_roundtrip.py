"""
Message parts on and off the wire
=================================

A message is a list of typed parts: text, inline files, file references,
and structured data. This walks one of each through the wire format and
shows where the inline-size ceiling sits.
"""

import json

from modalmesh import (
    MAX_INLINE_BYTES,
    DataPart,
    FilePart,
    Message,
    OversizeInlineError,
    SseAssembler,
    TextPart,
    build_wav,
    part_to_wire,
    sse_frame,
)

# A customer turn mixing a note, a voice clip, a reference to an already
# uploaded photo, and a structured metadata blob.
clip = build_wav("the left hinge arrived bent")
message = Message(
    role="user",
    parts=[
        TextPart("Order 7731, see the attached clip."),
        FilePart("audio/wav", data=clip, name="hinge.wav"),
        FilePart("image/png", uri="http://mesh.local/blob/4f1a9c"),
        DataPart({"order": 7731, "customer_tier": "plus"}),
    ],
    message_id="demo-001",
)

# to_wire produces plain JSON-friendly dicts; bytes ride base64-encoded.
wire = message.to_wire()
print(json.dumps(wire, indent=2)[:400], "...")

# The round trip is exact, including the audio bytes.
again = Message.from_wire(json.loads(json.dumps(wire)))
assert again == message
print("round trip ok:", again.parts[1].data == clip)

# Inline payloads stop at exactly 1 MiB; anything larger must travel by URI.
print("inline ceiling:", MAX_INLINE_BYTES, "bytes")
try:
    part_to_wire(FilePart("audio/wav", data=b"\x00" * (MAX_INLINE_BYTES + 1)))
except OversizeInlineError as err:
    print("oversize refused:", err)

# Streaming replies arrive as server-sent events. The assembler tolerates
# arbitrary chunk boundaries, so a frame split mid-line still reassembles.
frame = sse_frame({"kind": "status-update", "status": {"state": "working"}})
assembler = SseAssembler()
events = assembler.feed(frame[:10]) + assembler.feed(frame[10:])
print("streamed event:", events[0])
