"""Degradation-based token budget allocation for mixed visual/text samples.

Text is never truncated: the text token count is subtracted from the sequence
budget first, and the remaining visual budget is filled in two phases. Phase
one fixes every image at the cheapest tiling and spends the remainder on
temporal units (video frames at a target FPS, document pages), scaling the
per-item counts down proportionally when the budget is short. Phase two
raises the per-image tile cap along a descending ladder as far as the
leftover budget allows. Samples whose videos cannot reach the minimum frame
count are discarded rather than degraded below usefulness.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .manifest import Sample, VisualItem
from .tiling import TileGrid, TilingConfig, grid_tokens, select_grid

TILE_LADDER_DEFAULT = (12, 8, 6, 4, 2, 1)

PLANNED = "planned"
DISCARDED = "discarded"


class TextOverflowError(ValueError):
    """Text alone meets or exceeds the sequence budget; nothing can be truncated."""

    def __init__(self, sample_id: str, text_tokens: int, l_max: int):
        super().__init__(
            f"sample {sample_id!r}: text_tokens={text_tokens} >= l_max={l_max}"
        )
        self.sample_id = sample_id
        self.text_tokens = text_tokens
        self.l_max = l_max


@dataclass(frozen=True)
class BudgetConfig:
    l_max: int
    min_frames: int = 8
    fps_target: float = 2.0
    tile_ladder: tuple[int, ...] = TILE_LADDER_DEFAULT
    temporal_tokens: int = 256
    tiling: TilingConfig = field(default_factory=TilingConfig)

    def __post_init__(self):
        if self.l_max <= 0:
            raise ValueError("l_max must be positive")
        if self.min_frames < 1 or self.fps_target <= 0 or self.temporal_tokens < 1:
            raise ValueError("min_frames, fps_target and temporal_tokens must be positive")
        ladder = self.tile_ladder
        if not ladder or ladder[-1] != 1 or any(a <= b for a, b in zip(ladder, ladder[1:])):
            raise ValueError("tile_ladder must be strictly descending and end at 1")
        if ladder[0] > self.tiling.max_tiles:
            raise ValueError("tile_ladder exceeds the tiling max_tiles")


@dataclass(frozen=True)
class Budget:
    l_text: int
    l_visual: int


@dataclass(frozen=True)
class SamplingPlan:
    sample_id: str
    verdict: str
    reason: str | None = None
    tile_cap: int | None = None
    image_grids: tuple[TileGrid | None, ...] = ()  # aligned to sample.items, None for non-images
    temporal_counts: tuple[int, ...] = ()  # aligned to sample.items, 0 for images
    frame_timestamps: tuple[tuple[float, ...], ...] = ()  # aligned to sample.items, () for non-videos
    l_text: int = 0
    total_tokens: int | None = None

    @property
    def planned(self) -> bool:
        return self.verdict == PLANNED


def compute_budget(sample: Sample, cfg: BudgetConfig) -> Budget:
    """Split the sequence budget: full text first, remainder for visual content."""
    if sample.text_tokens >= cfg.l_max:
        raise TextOverflowError(sample.id, sample.text_tokens, cfg.l_max)
    return Budget(l_text=sample.text_tokens, l_visual=cfg.l_max - sample.text_tokens)


def temporal_cap(item: VisualItem, cfg: BudgetConfig) -> int:
    """Most temporal units an item can contribute: FPS-target frames or page count."""
    if item.kind == "video":
        return math.ceil(cfg.fps_target * item.duration_s)
    if item.kind == "document":
        return item.pages
    raise ValueError("temporal_cap is defined for video and document items only")


def frame_timestamps(duration_s: float, n: int) -> tuple[float, ...]:
    """Midpoint-uniform sampling times: n frames centered in equal slices of the video."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    step = duration_s / n
    return tuple((k + 0.5) * step for k in range(n))


def _largest_remainder_split(total: int, caps: list[int]) -> list[int]:
    # Distribute `total` units proportionally to caps, never exceeding a cap.
    cap_sum = sum(caps)
    if cap_sum == 0 or total == 0:
        return [0] * len(caps)
    assert total <= cap_sum
    base = [total * c // cap_sum for c in caps]
    remainders = [(-(total * c % cap_sum), i) for i, c in enumerate(caps)]
    remainders.sort()
    leftover = total - sum(base)
    for _, i in remainders[:leftover]:
        base[i] += 1
    assert all(n <= c for n, c in zip(base, caps))
    return base


def _discard(sample: Sample, reason: str, l_text: int) -> SamplingPlan:
    return SamplingPlan(sample_id=sample.id, verdict=DISCARDED, reason=reason, l_text=l_text)


def plan(sample: Sample, cfg: BudgetConfig) -> SamplingPlan:
    """Allocate the sample's visual budget; returns a plan or a discard verdict.

    Raises TextOverflowError when the text alone does not fit. Discards (a
    verdict, not an error) happen when any video would fall below the
    configured minimum frame count, or when the visual items cannot fit even
    at minimal degradation.
    """
    budget = compute_budget(sample, cfg)
    tok = cfg.temporal_tokens

    images = [(i, it) for i, it in enumerate(sample.items) if it.kind == "image"]
    temporal = [(i, it) for i, it in enumerate(sample.items) if it.kind != "image"]
    m = len(images)

    if sample.items and budget.l_visual < tok:
        return _discard(sample, "insufficient_budget", budget.l_text)
    if budget.l_visual < tok * m:
        return _discard(sample, "insufficient_budget", budget.l_text)

    # Phase 1: every image held at one tile; spend the rest on temporal units.
    counts = [0] * len(sample.items)
    n_total = 0
    if temporal:
        caps = [temporal_cap(it, cfg) for _, it in temporal]
        allowance = (budget.l_visual - tok * m) // tok
        n_total = min(sum(caps), allowance)
        if n_total <= 0:
            return _discard(sample, "insufficient_budget", budget.l_text)
        split = _largest_remainder_split(n_total, caps)
        for (i, it), n in zip(temporal, split):
            if it.kind == "video" and n < cfg.min_frames:
                return _discard(sample, "insufficient_budget", budget.l_text)
            counts[i] = n

    # Phase 2: raise the per-image tile cap as far as the leftover budget allows.
    residual = budget.l_visual - tok * n_total
    tile_cap = cfg.tile_ladder[-1]
    image_total = tok * m
    for t in cfg.tile_ladder:
        total_t = sum(
            grid_tokens(select_grid(it.dims, cfg.tiling, t), cfg.tiling) for _, it in images
        )
        if total_t <= residual:
            tile_cap, image_total = t, total_t
            break

    grids: list[TileGrid | None] = [None] * len(sample.items)
    for i, it in images:
        grids[i] = select_grid(it.dims, cfg.tiling, tile_cap)

    stamps: list[tuple[float, ...]] = [()] * len(sample.items)
    for i, it in temporal:
        if it.kind == "video" and counts[i] > 0:
            stamps[i] = frame_timestamps(it.duration_s, counts[i])

    total = budget.l_text + tok * n_total + image_total
    assert total <= cfg.l_max
    return SamplingPlan(
        sample_id=sample.id,
        verdict=PLANNED,
        tile_cap=tile_cap,
        image_grids=tuple(grids),
        temporal_counts=tuple(counts),
        frame_timestamps=tuple(stamps),
        l_text=budget.l_text,
        total_tokens=total,
    )


def plan_to_obj(p: SamplingPlan) -> dict:
    obj: dict = {"id": p.sample_id, "verdict": p.verdict}
    if p.reason is not None:
        obj["reason"] = p.reason
    obj["tile_cap"] = p.tile_cap
    obj["n_per_item"] = list(p.temporal_counts)
    obj["timestamps"] = [list(ts) for ts in p.frame_timestamps]
    obj["total_tokens"] = p.total_tokens
    return obj


def plan_from_obj(obj: dict) -> SamplingPlan:
    return SamplingPlan(
        sample_id=obj["id"],
        verdict=obj["verdict"],
        reason=obj.get("reason"),
        tile_cap=obj.get("tile_cap"),
        temporal_counts=tuple(obj.get("n_per_item", ())),
        frame_timestamps=tuple(tuple(ts) for ts in obj.get("timestamps", ())),
        total_tokens=obj.get("total_tokens"),
    )


def dumps_plan(p: SamplingPlan) -> str:
    return json.dumps(plan_to_obj(p), ensure_ascii=False)
