"""Orchestration of the two-level annotation flow against a pluggable endpoint.

Story jobs caption every human-annotated chapter, aggregate the captions into
a timestamped digest, and request long-form QA over the digest. Clip jobs
caption each clip, request QA with a sampled set of question types, and
anchor every question with its time interval and a non-revealing scene
context. Jobs are independent: transient endpoint errors and malformed
responses are retried with exponential backoff, and one job's permanent
failure never affects the others. Every job yields exactly one output record.
"""

from __future__ import annotations

import json
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Protocol

from .captions import (
    CaptionPair,
    Chapter,
    ResponseParseError,
    aggregate_chapter_captions,
    caption_frames_plan,
    parse_caption_response,
)
from .prompts import (
    render_caption_prompt,
    render_caption_retry_prompt,
    render_clip_qa_prompt,
    render_video_qa_prompt,
)
from .qa import AnchorLeakError, ClipQA, anchor, parse_qa_response
from .question_types import QUESTION_TYPES, sample_question_types

QA_TYPES_PER_REQUEST = 5


@dataclass(frozen=True)
class LlmRequest:
    prompt: str
    image_refs: tuple[str, ...] = ()
    temperature: float = 0.2
    max_output_tokens: int = 2048


@dataclass(frozen=True)
class LlmResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0


class LlmClient(Protocol):
    def submit(self, request: LlmRequest) -> LlmResponse: ...


class LlmError(RuntimeError):
    """Permanent endpoint failure; not retried."""


class TransientLlmError(LlmError):
    """Retryable endpoint failure (timeouts, throttling, 5xx)."""


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 3
    backoff_base_s: float = 0.5
    backoff_cap_s: float = 30.0
    max_in_flight: int = 4
    temperature: float = 0.2
    max_output_tokens: int = 2048
    seed: int = 0
    sleep: Callable[[float], None] = time.sleep

    def backoff(self, attempt: int) -> float:
        return min(self.backoff_cap_s, self.backoff_base_s * 2**attempt)


class RateLimiter:
    """Token bucket capping request rate; thread-safe, clock injectable."""

    def __init__(
        self,
        requests_per_minute: float,
        burst: float | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if requests_per_minute <= 0:
            raise ValueError("requests_per_minute must be positive")
        self._rate = requests_per_minute / 60.0
        self._capacity = burst if burst is not None else max(1.0, self._rate)
        self._tokens = self._capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self._capacity, self._tokens + (now - self._last) * self._rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self._rate
            self._sleep(wait)


class HttpClient:
    """Minimal JSON-over-HTTP adapter for a generation endpoint.

    POSTs {model, prompt, image_refs, temperature, max_output_tokens} and
    expects {"text": ..., "usage": {...}} back. HTTP 429/5xx and connection
    errors surface as transient; anything else is permanent.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        timeout_s: float = 120.0,
        rate_limiter: RateLimiter | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.timeout_s = timeout_s
        self.rate_limiter = rate_limiter

    def submit(self, request: LlmRequest) -> LlmResponse:
        if self.rate_limiter is not None:
            self.rate_limiter.acquire()
        payload = json.dumps(
            {
                "model": self.model,
                "prompt": request.prompt,
                "image_refs": list(request.image_refs),
                "temperature": request.temperature,
                "max_output_tokens": request.max_output_tokens,
            }
        ).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint, data=payload, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                body = resp.read()
        except urllib.error.HTTPError as exc:
            if exc.code == 429 or exc.code >= 500:
                raise TransientLlmError(f"endpoint returned HTTP {exc.code}") from exc
            raise LlmError(f"endpoint returned HTTP {exc.code}") from exc
        except (urllib.error.URLError, TimeoutError) as exc:
            raise TransientLlmError(f"endpoint unreachable: {exc}") from exc
        try:
            obj = json.loads(body.decode("utf-8"))
            usage = obj.get("usage", {})
            return LlmResponse(
                text=obj["text"],
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            )
        except (KeyError, ValueError, UnicodeDecodeError) as exc:
            raise LlmError(f"endpoint returned malformed payload: {exc}") from exc


# --- jobs --------------------------------------------------------------------

STORY = "story"
CLIP = "clip"


@dataclass(frozen=True)
class AnnotationJob:
    index: int
    video_id: str
    uri: str
    chapters: tuple[Chapter, ...] = ()
    clips: tuple[tuple[float, float], ...] = ()
    clip_titles: tuple[str, ...] = ()

    @property
    def kind(self) -> str:
        return STORY if self.chapters else CLIP


class JobFileError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} at line {line}")
        self.line = line


def parse_jobs(stream: IO[str] | Iterable[str]) -> list[AnnotationJob]:
    """Read newline-delimited job records: chapters for story jobs, clips otherwise."""
    jobs: list[AnnotationJob] = []
    for line_no, raw in enumerate(stream, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise JobFileError(f"malformed job record ({exc.msg})", line_no) from exc
        if not isinstance(obj, dict) or not isinstance(obj.get("video_id"), str):
            raise JobFileError("job record needs a video_id", line_no)
        uri = obj.get("uri", "")
        chapters_raw = obj.get("chapters")
        clips_raw = obj.get("clips")
        if bool(chapters_raw) == bool(clips_raw):
            raise JobFileError("job record needs chapters or clips (not both)", line_no)
        try:
            if chapters_raw:
                chapters = tuple(
                    Chapter(title=c["title"], span=(float(c["start"]), float(c["end"])))
                    for c in chapters_raw
                )
                job = AnnotationJob(len(jobs), obj["video_id"], uri, chapters=chapters)
            else:
                spans = tuple((float(c["start"]), float(c["end"])) for c in clips_raw)
                titles = tuple(
                    c.get("title") or f"clip {i}" for i, c in enumerate(clips_raw)
                )
                job = AnnotationJob(len(jobs), obj["video_id"], uri, clips=spans, clip_titles=titles)
        except (KeyError, TypeError, ValueError) as exc:
            raise JobFileError(f"invalid job record ({exc})", line_no) from exc
        jobs.append(job)
    return jobs


# --- execution ----------------------------------------------------------------


class _StageFailure(Exception):
    def __init__(self, stage: str, reason: str):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason


@dataclass
class _JobState:
    retries: int = 0


@dataclass
class PipelineResult:
    records: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    @property
    def ok_count(self) -> int:
        return len(self.records) - len(self.failures)


def _frame_refs(uri: str, timestamps: tuple[float, ...]) -> tuple[str, ...]:
    # Media-fragment style frame locators, in temporal order.
    return tuple(f"{uri}#t={ts:.3f}" for ts in timestamps)


def _call(
    client: LlmClient,
    request: LlmRequest,
    policy: RetryPolicy,
    stage: str,
    state: _JobState,
    parser: Callable[[str], object],
):
    last_reason = ""
    for attempt in range(policy.max_retries + 1):
        if attempt > 0:
            policy.sleep(policy.backoff(attempt - 1))
            state.retries += 1
        try:
            response = client.submit(request)
        except TransientLlmError as exc:
            last_reason = str(exc)
            continue
        except LlmError as exc:
            raise _StageFailure(stage, str(exc)) from exc
        try:
            return parser(response.text)
        except ResponseParseError as exc:
            last_reason = str(exc)
            continue
    raise _StageFailure(stage, f"retries exhausted: {last_reason}")


def _caption_segment(
    client: LlmClient,
    job: AnnotationJob,
    title: str,
    span: tuple[float, float],
    policy: RetryPolicy,
    state: _JobState,
    banned_terms: tuple[str, ...] = (),
) -> CaptionPair:
    if banned_terms:
        prompt = render_caption_retry_prompt(title, banned_terms)
    else:
        prompt = render_caption_prompt(title)
    frames = caption_frames_plan(Chapter(title=title, span=span))
    request = LlmRequest(
        prompt=prompt,
        image_refs=_frame_refs(job.uri, frames),
        temperature=policy.temperature,
        max_output_tokens=policy.max_output_tokens,
    )
    return _call(client, request, policy, "caption", state, parse_caption_response)


def _run_story_job(client: LlmClient, job: AnnotationJob, policy: RetryPolicy, state: _JobState) -> dict:
    if len(job.chapters) < 2:
        raise _StageFailure("validate", "insufficient chapters: need at least two")
    prev_end = None
    for ch in job.chapters:
        if prev_end is not None and ch.span[0] < prev_end:
            raise _StageFailure("validate", "chapters must be sorted and non-overlapping")
        prev_end = ch.span[1]

    captioned = [
        (ch, _caption_segment(client, job, ch.title, ch.span, policy, state))
        for ch in job.chapters
    ]
    digest = aggregate_chapter_captions(captioned)
    types = sample_question_types(QUESTION_TYPES, QA_TYPES_PER_REQUEST, policy.seed + job.index)
    span = (job.chapters[0].span[0], job.chapters[-1].span[1])
    request = LlmRequest(
        prompt=render_video_qa_prompt(digest, types),
        temperature=policy.temperature,
        max_output_tokens=policy.max_output_tokens,
    )
    qa: list[ClipQA] = _call(
        client, request, policy, "qa", state, lambda t: parse_qa_response(t, types, span)
    )
    return {
        "video_id": job.video_id,
        "kind": STORY,
        "captions": [
            {"title": ch.title, "start": ch.span[0], "end": ch.span[1], "brief": p.brief, "detailed": p.detailed}
            for ch, p in captioned
        ],
        "qa": [
            {"type": q.qtype, "q": q.question, "a": q.answer, "anchored_q": None} for q in qa
        ],
        "status": "ok",
    }


def _anchor_all(
    client: LlmClient,
    job: AnnotationJob,
    title: str,
    span: tuple[float, float],
    qa_items: list[ClipQA],
    pair: CaptionPair,
    policy: RetryPolicy,
    state: _JobState,
) -> tuple[CaptionPair, list[tuple[ClipQA, str]], int]:
    """Anchor every QA against the brief caption, regenerating it on leaks.

    Returns the final caption pair, (qa, anchored_question) pairs, and the
    count of QA dropped because the leak persisted through retries.
    """
    for _ in range(policy.max_retries + 1):
        leaked = [q for q in qa_items if _leaks(q, pair.brief)]
        if not leaked:
            break
        new_pair = _caption_segment(
            client, job, title, span, policy, state,
            banned_terms=tuple(q.answer for q in leaked),
        )
        if new_pair == pair:
            # Endpoint is not changing its caption; no point burning retries.
            break
        pair = new_pair

    anchored: list[tuple[ClipQA, str]] = []
    dropped = 0
    for q in qa_items:
        try:
            anchored.append((q, anchor(q, pair.brief).question_anchored))
        except AnchorLeakError:
            dropped += 1
    return pair, anchored, dropped


def _leaks(qa: ClipQA, brief: str) -> bool:
    try:
        anchor(qa, brief)
        return False
    except AnchorLeakError:
        return True


def _run_clip_job(client: LlmClient, job: AnnotationJob, policy: RetryPolicy, state: _JobState) -> dict:
    captions = []
    qa_out = []
    dropped = 0
    for i, span in enumerate(job.clips):
        title = job.clip_titles[i] if i < len(job.clip_titles) else f"clip {i}"
        pair = _caption_segment(client, job, title, span, policy, state)
        types = sample_question_types(
            QUESTION_TYPES, QA_TYPES_PER_REQUEST, policy.seed + job.index * 1009 + i
        )
        request = LlmRequest(
            prompt=render_clip_qa_prompt(pair.detailed, pair.brief, types),
            image_refs=_frame_refs(job.uri, caption_frames_plan(Chapter(title=title, span=span))),
            temperature=policy.temperature,
            max_output_tokens=policy.max_output_tokens,
        )
        qa_items: list[ClipQA] = _call(
            client, request, policy, "qa", state, lambda t: parse_qa_response(t, types, span)
        )
        pair, anchored, clip_dropped = _anchor_all(
            client, job, title, span, qa_items, pair, policy, state
        )
        dropped += clip_dropped
        captions.append(
            {"start": span[0], "end": span[1], "brief": pair.brief, "detailed": pair.detailed}
        )
        qa_out.extend(
            {"type": q.qtype, "q": q.question, "a": q.answer, "anchored_q": aq}
            for q, aq in anchored
        )
    record = {
        "video_id": job.video_id,
        "kind": CLIP,
        "captions": captions,
        "qa": qa_out,
        "status": "ok",
    }
    if dropped:
        record["anchor_dropped"] = dropped
    return record


def run_job(client: LlmClient, job: AnnotationJob, policy: RetryPolicy) -> dict:
    """Run one job to completion; always returns a record, never raises."""
    state = _JobState()
    try:
        if job.kind == STORY:
            record = _run_story_job(client, job, policy, state)
        else:
            record = _run_clip_job(client, job, policy, state)
    except _StageFailure as exc:
        record = {
            "video_id": job.video_id,
            "kind": job.kind,
            "captions": [],
            "qa": [],
            "status": "failed",
            "stage": exc.stage,
            "reason": exc.reason,
        }
    except Exception as exc:  # defensive: a bad job must not sink the batch
        record = {
            "video_id": job.video_id,
            "kind": job.kind,
            "captions": [],
            "qa": [],
            "status": "failed",
            "stage": "internal",
            "reason": f"{type(exc).__name__}: {exc}",
        }
    record["retry_count"] = state.retries
    return record


def run_pipeline(
    jobs: list[AnnotationJob],
    client: LlmClient,
    policy: RetryPolicy = RetryPolicy(),
    on_record: Callable[[dict], None] | None = None,
) -> PipelineResult:
    """Run all jobs with bounded concurrency; one record per job, no silent loss.

    on_record is invoked once per finished job under a lock (append-only
    sink); completion order across jobs is not guaranteed.
    """
    result = PipelineResult()
    lock = threading.Lock()

    def finish(record: dict) -> None:
        with lock:
            result.records.append(record)
            if record["status"] != "ok":
                result.failures.append(record)
            if on_record is not None:
                on_record(record)

    if policy.max_in_flight <= 1:
        for job in jobs:
            finish(run_job(client, job, policy))
    else:
        with ThreadPoolExecutor(max_workers=policy.max_in_flight) as pool:
            for record in pool.map(lambda j: run_job(client, j, policy), jobs):
                finish(record)
    return result
