"""Synthetic media: WAV/PNG builders and their embedded-text extractors."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modalmesh.media import (
    MediaFormatError,
    build_png,
    build_wav,
    extract_png_caption,
    extract_wav_transcript,
)

_TEXT = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), min_codepoint=32),
    min_size=1, max_size=200,
)


@given(_TEXT)
def test_wav_transcript_round_trip(text):
    assert extract_wav_transcript(build_wav(text)) == text


@given(_TEXT)
def test_png_caption_round_trip(text):
    assert extract_png_caption(build_png(text)) == text


def test_wav_is_a_playable_riff_container():
    payload = build_wav("hello")
    assert payload[:4] == b"RIFF" and payload[8:12] == b"WAVE"
    # RIFF size field covers everything after the first 8 bytes
    declared = int.from_bytes(payload[4:8], "little")
    assert declared == len(payload) - 8


def test_png_has_signature_and_trailing_iend():
    payload = build_png("hello")
    assert payload.startswith(b"\x89PNG\r\n\x1a\n")
    assert payload.rstrip(b"\x00")[-8:-4] == b"IEND" or b"IEND" in payload


@pytest.mark.parametrize("size", [4096, 10_000, 1_048_576, 1_048_577])
def test_wav_exact_size_targeting(size):
    payload = build_wav("clip", size_bytes=size)
    assert len(payload) == size
    assert extract_wav_transcript(payload) == "clip"


@pytest.mark.parametrize("size", [2048, 10_000, 1_048_577])
def test_png_exact_size_targeting(size):
    payload = build_png("photo", size_bytes=size)
    assert len(payload) == size
    assert extract_png_caption(payload) == "photo"


def test_size_target_too_small_rejected():
    with pytest.raises(MediaFormatError):
        build_wav("a transcript that cannot fit", size_bytes=30)
    with pytest.raises(MediaFormatError):
        build_png("a caption that cannot fit", size_bytes=30)


def test_builders_are_deterministic():
    assert build_wav("same text") == build_wav("same text")
    assert build_png("same text") == build_png("same text")


def test_extractors_return_none_for_foreign_bytes():
    assert extract_wav_transcript(b"not a wav") is None
    assert extract_png_caption(b"not a png") is None
    # valid container without the text chunk
    assert extract_png_caption(b"\x89PNG\r\n\x1a\x08junk") is None


def test_extractors_reject_cross_format():
    assert extract_wav_transcript(build_png("x")) is None
    assert extract_png_caption(build_wav("x")) is None
