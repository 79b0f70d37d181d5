"""Clip QA parsing and anchor construction.

Clip-level questions are only unambiguous inside their clip; anchoring
prepends the clip's time interval plus a short scene description so the
question survives at whole-video scale. The scene description must not give
the answer away, which the leak check enforces with a conservative
normalized-substring test.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .captions import ResponseParseError, extract_json_object, format_seconds
from .question_types import QuestionType


@dataclass(frozen=True)
class ClipQA:
    qtype: str
    question: str
    answer: str
    span: tuple[float, float]

    def __post_init__(self):
        if not self.question or not self.answer:
            raise ValueError("question and answer must be non-empty")
        if self.span[1] <= self.span[0]:
            raise ValueError("QA span must have end > start")


@dataclass(frozen=True)
class AnchoredQA:
    question_anchored: str
    answer: str


class AnchorLeakError(ValueError):
    """Context anchor would reveal the answer; a fresh caption is needed."""

    def __init__(self, answer: str, brief: str):
        super().__init__(f"answer {answer!r} leaks into the context anchor")
        self.answer = answer
        self.brief = brief


_QTYPE_PLACEHOLDER = re.compile(r"^question_type_(\d+)$")


def parse_qa_response(
    text: str,
    expected_types: Sequence[QuestionType],
    span: tuple[float, float],
) -> list[ClipQA]:
    """Decode a QA response keyed by question type; nulls mean 'no question fits'.

    Keys may be the actual type names or positional question_type_N
    placeholders; anything else is an error. Only non-null entries come back.
    """
    obj = extract_json_object(text)
    by_name = {t.name: t for t in expected_types}
    out: list[ClipQA] = []
    for key, value in obj.items():
        if key in by_name:
            qtype = by_name[key]
        else:
            m = _QTYPE_PLACEHOLDER.match(key)
            if not m or not 1 <= int(m.group(1)) <= len(expected_types):
                raise ResponseParseError(f"unknown question type key {key!r}")
            qtype = expected_types[int(m.group(1)) - 1]
        if value is None:
            continue
        if not isinstance(value, dict) or "Q" not in value or "A" not in value:
            raise ResponseParseError(f"entry for {key!r} must be null or have Q and A")
        q, a = value["Q"], value["A"]
        if not isinstance(q, str) or not isinstance(a, str) or not q or not a:
            raise ResponseParseError(f"entry for {key!r} has empty Q or A")
        out.append(ClipQA(qtype=qtype.name, question=q, answer=a, span=span))
    return out


def _normalize(text: str) -> str:
    return text.strip().casefold()


def anchor(qa: ClipQA, brief: str) -> AnchoredQA:
    """Prefix a clip question with its time interval and scene context.

    Raises AnchorLeakError when the normalized answer appears inside the
    brief caption; the caller should regenerate the caption and retry.
    """
    context = brief.strip().rstrip(".")
    if not context:
        raise ValueError("brief caption must be non-empty")
    if _normalize(qa.answer) in _normalize(context):
        raise AnchorLeakError(qa.answer, brief)
    start, end = qa.span
    question = (
        f"Between {format_seconds(start)}s and {format_seconds(end)}s, "
        f"in the scene where {context}: {qa.question}"
    )
    return AnchoredQA(question_anchored=question, answer=qa.answer)
