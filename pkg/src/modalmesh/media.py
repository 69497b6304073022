"""Deterministic synthetic media for benchmark fixtures.

Voice clips are valid RIFF/WAVE files (PCM 16-bit mono silence) carrying the
clip's transcript in a custom trailing `trns` chunk. Images are valid PNGs
(8-bit grayscale gradient) carrying the caption in a standard `tEXt` chunk.
Both builders accept an exact target byte size so fixtures can straddle the
inline-payload threshold; identical inputs always produce identical bytes.

The embedded text rides inside the payload on purpose: mock transcoders can
recover the transcript or caption from the bytes alone, with no side lookup.
"""

from __future__ import annotations

import struct
import zlib
from typing import Optional

WAV_SAMPLE_RATE = 8000
_WAV_FIXED_OVERHEAD = 52  # riff hdr (12) + fmt (24) + data hdr (8) + trns hdr (8)
_DEFAULT_WAV_DATA_BYTES = 4000  # 0.25 s of 16-bit mono silence


class MediaFormatError(ValueError):
    pass


def build_wav(transcript: str, size_bytes: Optional[int] = None) -> bytes:
    """Build a PCM WAV whose trailing `trns` chunk holds the transcript.

    With `size_bytes` the output is exactly that long (silence padding plus a
    parity NUL inside the transcript chunk). Chunks are written unaligned;
    `trns` comes last so standard fmt/data readers are unaffected.
    """
    text = transcript.encode("utf-8")
    if size_bytes is None:
        nul_pad = len(text) % 2
        data_len = _DEFAULT_WAV_DATA_BYTES
    else:
        remaining = size_bytes - _WAV_FIXED_OVERHEAD - len(text)
        if remaining < 0:
            raise MediaFormatError(
                f"target size {size_bytes} too small for a {len(text)}-byte transcript"
            )
        nul_pad = remaining % 2
        data_len = remaining - nul_pad
    trns = text + b"\x00" * nul_pad

    fmt = struct.pack(
        "<HHIIHH",
        1,  # PCM
        1,  # mono
        WAV_SAMPLE_RATE,
        WAV_SAMPLE_RATE * 2,
        2,
        16,
    )
    body = (
        b"WAVE"
        + b"fmt " + struct.pack("<I", len(fmt)) + fmt
        + b"data" + struct.pack("<I", data_len) + b"\x00" * data_len
        + b"trns" + struct.pack("<I", len(trns)) + trns
    )
    out = b"RIFF" + struct.pack("<I", len(body)) + body
    if size_bytes is not None and len(out) != size_bytes:
        raise MediaFormatError(f"built {len(out)} bytes, wanted {size_bytes}")
    return out


def extract_wav_transcript(payload: bytes) -> Optional[str]:
    """Recover the embedded transcript, or None if absent/not a WAV."""
    if len(payload) < 12 or payload[:4] != b"RIFF" or payload[8:12] != b"WAVE":
        return None
    pos = 12
    while pos + 8 <= len(payload):
        chunk_id = payload[pos : pos + 4]
        (length,) = struct.unpack_from("<I", payload, pos + 4)
        start = pos + 8
        if start + length > len(payload):
            return None
        if chunk_id == b"trns":
            return payload[start : start + length].rstrip(b"\x00").decode("utf-8")
        pos = start + length
    return None


_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_PNG_SIZE = 8  # 8x8 grayscale gradient


def _png_chunk(chunk_type: bytes, data: bytes) -> bytes:
    crc = zlib.crc32(chunk_type + data) & 0xFFFFFFFF
    return struct.pack(">I", len(data)) + chunk_type + data + struct.pack(">I", crc)


def build_png(caption: str, size_bytes: Optional[int] = None) -> bytes:
    """Build a valid grayscale PNG with the caption in an `iTXt` chunk.

    iTXt rather than tEXt because captions are arbitrary text and tEXt is
    Latin-1 only. Exact sizing pads with a `tEXt` chunk (keyword "padding"),
    which costs 20 bytes of framing: targets that land between the base size
    and base+20 are unreachable and rejected.
    """
    ihdr = struct.pack(">IIBBBBB", _PNG_SIZE, _PNG_SIZE, 8, 0, 0, 0, 0)
    raw = b"".join(
        b"\x00" + bytes(((row * _PNG_SIZE + col) * 29) % 256 for col in range(_PNG_SIZE))
        for row in range(_PNG_SIZE)
    )
    idat = zlib.compress(raw, 9)
    # keyword NUL flag method language NUL translated-keyword NUL text
    caption_data = b"caption\x00\x00\x00\x00\x00" + caption.encode("utf-8")
    base = (
        _PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"iTXt", caption_data)
        + _png_chunk(b"IDAT", idat)
    )
    end = _png_chunk(b"IEND", b"")
    if size_bytes is None:
        out = base + end
    else:
        needed = size_bytes - len(base) - len(end)
        if needed == 0:
            out = base + end
        elif needed < 20:
            raise MediaFormatError(
                f"target size {size_bytes} unreachable; base is {len(base) + len(end)} "
                "and padding costs at least 20 bytes"
            )
        else:
            pad = _png_chunk(b"tEXt", b"padding\x00" + b"x" * (needed - 20))
            out = base + pad + end
    if size_bytes is not None and len(out) != size_bytes:
        raise MediaFormatError(f"built {len(out)} bytes, wanted {size_bytes}")
    return out


def extract_png_caption(payload: bytes) -> Optional[str]:
    """Recover the embedded caption, or None if absent/not a PNG."""
    if not payload.startswith(_PNG_SIGNATURE):
        return None
    pos = len(_PNG_SIGNATURE)
    while pos + 8 <= len(payload):
        (length,) = struct.unpack_from(">I", payload, pos)
        chunk_type = payload[pos + 4 : pos + 8]
        start = pos + 8
        if start + length + 4 > len(payload):
            return None
        if chunk_type == b"iTXt":
            data = payload[start : start + length]
            keyword, _, rest = data.partition(b"\x00")
            if keyword == b"caption" and len(rest) >= 2 and rest[0] == 0:
                # skip flag+method, then the language and translated-keyword fields
                rest = rest[2:]
                _, _, rest = rest.partition(b"\x00")
                _, _, text = rest.partition(b"\x00")
                try:
                    return text.decode("utf-8")
                except UnicodeDecodeError:
                    return None
        pos = start + length + 4
    return None
