"""Chapter captioning: frame planning, response parsing, caption aggregation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

MAX_CAPTION_FRAMES = 50
CAPTION_FPS = 2.0


class ResponseParseError(ValueError):
    """Model output could not be parsed into the expected structure."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class Chapter:
    title: str
    span: tuple[float, float]

    def __post_init__(self):
        if not self.title:
            raise ValueError("chapter title must be non-empty")
        if self.span[1] <= self.span[0]:
            raise ValueError("chapter span must have end > start")

    @property
    def length_s(self) -> float:
        return self.span[1] - self.span[0]


@dataclass(frozen=True)
class CaptionPair:
    brief: str
    detailed: str

    def __post_init__(self):
        if not self.brief or not self.detailed:
            raise ValueError("brief and detailed captions must be non-empty")


def format_seconds(value: float) -> str:
    """Whole seconds render as integers, fractional ones with one decimal."""
    if value == int(value):
        return str(int(value))
    return f"{value:.1f}"


def caption_frames_plan(chapter: Chapter) -> tuple[float, ...]:
    """Frame sampling times for a segment: 2 FPS, capped at 50, at least one.

    Timestamps are midpoint-uniform within the span so the segment's start
    and end are represented evenly.
    """
    n = min(MAX_CAPTION_FRAMES, math.ceil(CAPTION_FPS * chapter.length_s))
    n = max(1, n)
    step = chapter.length_s / n
    start = chapter.span[0]
    return tuple(start + (k + 0.5) * step for k in range(n))


def extract_json_object(text: str) -> dict:
    """First parseable JSON object in the text; tolerates fences and trailing prose."""
    decoder = json.JSONDecoder()
    pos = text.find("{")
    while pos != -1:
        try:
            obj, _ = decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            pos = text.find("{", pos + 1)
            continue
        if isinstance(obj, dict):
            return obj
        pos = text.find("{", pos + 1)
    raise ResponseParseError("no JSON object found in response", offset=0)


def parse_caption_response(text: str) -> CaptionPair:
    """Pull the brief/detailed caption pair out of a model response."""
    obj = extract_json_object(text)
    for key in ("Brief Caption", "Detailed Caption"):
        if key not in obj:
            raise ResponseParseError(f"caption response missing {key!r}")
        if not isinstance(obj[key], str) or not obj[key]:
            raise ResponseParseError(f"caption response has empty {key!r}")
    return CaptionPair(brief=obj["Brief Caption"], detailed=obj["Detailed Caption"])


def aggregate_chapter_captions(chapters: list[tuple[Chapter, CaptionPair]]) -> str:
    """Timestamped one-line-per-chapter digest feeding whole-video QA generation.

    Requires at least two chapters, sorted and non-overlapping; videos with a
    single chapter carry no story structure and are filtered upstream.
    """
    if len(chapters) < 2:
        raise ValueError("insufficient chapters: need at least two")
    prev_end = None
    for ch, _ in chapters:
        if prev_end is not None and ch.span[0] < prev_end:
            raise ValueError("chapters must be sorted and non-overlapping")
        prev_end = ch.span[1]
    return "\n".join(
        f"{format_seconds(ch.span[0])} ~ {format_seconds(ch.span[1])}: {pair.detailed}"
        for ch, pair in chapters
    )
