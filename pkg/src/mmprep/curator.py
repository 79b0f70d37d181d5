"""Novelty-driven video selection against an existing clip collection.

Candidate videos arrive as per-second embedding vectors. Each video is cut
into fixed-length clips, every clip's vectors are pooled into one feature,
and the clip's maximum cosine similarity against the whole reference
collection decides novelty: strictly below the threshold means novel, and a
video is selected when at least one of its clips is novel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels

CLIP_LEN_S = 10.0
MIN_TAIL_S = 1.0
DEFAULT_TAU = 0.5


@dataclass(frozen=True)
class ClipFeature:
    video_id: str
    clip_index: int
    span: tuple[float, float]
    vector: np.ndarray

    def __post_init__(self):
        if self.span[1] <= self.span[0]:
            raise ValueError("clip span must have end > start")


@dataclass(frozen=True)
class NoveltyReport:
    video_id: str
    per_clip_smax: tuple[float, ...]
    novel_clips: tuple[int, ...]
    selected: bool

    def to_obj(self) -> dict:
        return {
            "video_id": self.video_id,
            "per_clip_smax": list(self.per_clip_smax),
            "novel_clips": list(self.novel_clips),
            "selected": self.selected,
        }


def segment_clips(duration_s: float, clip_len_s: float = CLIP_LEN_S) -> list[tuple[float, float]]:
    """Consecutive fixed-length spans; a partial tail survives only if >= 1 s long."""
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    if clip_len_s <= 0:
        raise ValueError("clip_len_s must be positive")
    n_full = int(duration_s // clip_len_s)
    spans = [(k * clip_len_s, (k + 1) * clip_len_s) for k in range(n_full)]
    tail_start = n_full * clip_len_s
    if duration_s - tail_start >= MIN_TAIL_S:
        spans.append((tail_start, duration_s))
    return spans


def pool_clip(vectors: Sequence[np.ndarray] | np.ndarray, mode: str = "mean") -> np.ndarray:
    """Collapse a clip's per-second vectors into one feature (mean or max per dim)."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[0] == 0:
        raise ValueError("cannot pool an empty clip")
    if mode == "mean":
        return arr.mean(axis=0)
    if mode == "max":
        return arr.max(axis=0)
    raise ValueError(f"unknown pooling mode {mode!r}")


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("cosine requires two 1-D vectors of equal dimension")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix of row vectors")
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero vector in feature matrix")
    return m / norms[:, None]


class ReferenceIndex:
    """Immutable normalized matrix of reference clip features; safe to share."""

    def __init__(self, matrix: np.ndarray):
        self._matrix = _normalize_rows(matrix)
        self._matrix.setflags(write=False)

    @classmethod
    def from_clips(cls, clips: Iterable[ClipFeature]) -> "ReferenceIndex":
        vectors = [c.vector for c in clips]
        if not vectors:
            raise ValueError("reference set is empty")
        return cls(np.stack(vectors))

    @property
    def count(self) -> int:
        return self._matrix.shape[0]

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    def smax_many(self, vectors: np.ndarray) -> np.ndarray:
        """Max cosine of each row vector against the whole reference set."""
        cand = _normalize_rows(np.atleast_2d(np.asarray(vectors, dtype=np.float64)))
        if cand.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: {cand.shape[1]} vs reference {self.dim}")
        return kernels.smax(cand, self._matrix)


def max_similarity(candidate: ClipFeature, reference: ReferenceIndex) -> float:
    return float(reference.smax_many(candidate.vector)[0])


def clips_from_seconds(
    video_id: str,
    per_second_vectors: np.ndarray,
    clip_len_s: float = CLIP_LEN_S,
    pool: str = "mean",
) -> list[ClipFeature]:
    """Cut a 1-fps feature track into pooled clip features."""
    track = np.asarray(per_second_vectors, dtype=np.float64)
    if track.ndim != 2 or track.shape[0] == 0:
        raise ValueError("per_second_vectors must be a non-empty 2-D array")
    duration = float(track.shape[0])  # 1 vector per second
    clips = []
    for idx, (start, end) in enumerate(segment_clips(duration, clip_len_s)):
        rows = track[math.floor(start) : math.ceil(end)]
        clips.append(
            ClipFeature(video_id=video_id, clip_index=idx, span=(start, end), vector=pool_clip(rows, pool))
        )
    return clips


def select_novel(
    candidates: Iterable[ClipFeature],
    reference: ReferenceIndex,
    tau: float = DEFAULT_TAU,
) -> list[NoveltyReport]:
    """Per-video novelty verdicts: a clip is novel iff its max similarity < tau."""
    if not -1 < tau <= 1:
        raise ValueError("tau must be in (-1, 1]")
    by_video: dict[str, list[ClipFeature]] = {}
    for clip in candidates:
        by_video.setdefault(clip.video_id, []).append(clip)

    reports = []
    for video_id in sorted(by_video):
        clips = sorted(by_video[video_id], key=lambda c: c.clip_index)
        smax = reference.smax_many(np.stack([c.vector for c in clips]))
        novel = tuple(c.clip_index for c, s in zip(clips, smax) if s < tau)
        reports.append(
            NoveltyReport(
                video_id=video_id,
                per_clip_smax=tuple(float(s) for s in smax),
                novel_clips=novel,
                selected=bool(novel),
            )
        )
    return reports


# --- feature file format: one header line, then count x dim vectors ---------
#
# Header (UTF-8 JSON, newline-terminated): {"video_id","dim","fps":1,"count"}.
# Body is either `count*dim` little-endian float32 values (binary flavor) or
# `count` whitespace-separated text lines (textual flavor); detected by size.


def write_feature_file(path: str | Path, video_id: str, vectors: np.ndarray, binary: bool = True) -> None:
    arr = np.asarray(vectors, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError("vectors must be 2-D (count x dim)")
    header = json.dumps(
        {"video_id": video_id, "dim": int(arr.shape[1]), "fps": 1, "count": int(arr.shape[0])}
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8") + b"\n")
        if binary:
            fh.write(arr.astype("<f4").tobytes())
        else:
            for row in arr:
                fh.write((" ".join(repr(float(v)) for v in row) + "\n").encode("utf-8"))


def read_feature_file(path: str | Path) -> tuple[str, np.ndarray]:
    """Load a per-second feature track; returns (video_id, count x dim float32)."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        body = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: malformed feature header") from exc
    for key in ("video_id", "dim", "count"):
        if key not in header:
            raise ValueError(f"{path}: feature header missing {key!r}")
    if header.get("fps", 1) != 1:
        raise ValueError(f"{path}: unsupported feature fps {header.get('fps')!r} (expected 1)")
    dim, count = int(header["dim"]), int(header["count"])
    if dim < 1 or count < 1:
        raise ValueError(f"{path}: invalid dim/count in header")
    expected = count * dim * 4
    if len(body) == expected:
        arr = np.frombuffer(body, dtype="<f4").reshape(count, dim).copy()
    else:
        values = np.array(body.decode("utf-8").split(), dtype=np.float32)
        if values.size != count * dim:
            raise ValueError(
                f"{path}: body has {values.size} values, header promises {count * dim}"
            )
        arr = values.reshape(count, dim)
    return str(header["video_id"]), arr


def load_feature_dir(directory: str | Path) -> list[tuple[str, np.ndarray]]:
    """Read every feature file in a directory, sorted by filename."""
    paths = sorted(p for p in Path(directory).iterdir() if p.is_file())
    if not paths:
        raise ValueError(f"no feature files in {directory}")
    return [read_feature_file(p) for p in paths]
