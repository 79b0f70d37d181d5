"""Sequence packing, progressive stage table, and short/long dataset mixing."""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass

from .budget import SamplingPlan


@dataclass(frozen=True)
class PackedSequence:
    pack_id: int
    member_ids: tuple[str, ...]
    total_tokens: int


@dataclass(frozen=True)
class StageConfig:
    name: str
    l_max: int
    batch_size: int
    learning_rate: float
    trainable_scope: str
    mix_short_long: tuple[float, float]


class PackOverflowError(ValueError):
    def __init__(self, sample_id: str, total_tokens: int, l_max: int):
        super().__init__(
            f"plan {sample_id!r} has {total_tokens} tokens, exceeding pack capacity {l_max}"
        )
        self.sample_id = sample_id


def pack(plans: list[SamplingPlan], l_max: int) -> list[PackedSequence]:
    """Worst-fit-decreasing packing of planned samples into capacity-l_max sequences.

    Items are placed largest-first into whichever open pack has the most
    remaining room; a new pack opens only when nothing fits. Filling the
    emptiest pack first keeps pack loads near-equal. Fully deterministic:
    ties in size break by sample id, ties in remaining room by pack id.
    """
    for p in plans:
        if not p.planned or p.total_tokens is None:
            raise ValueError(f"plan {p.sample_id!r} is not a planned sample")
        if p.total_tokens > l_max:
            raise PackOverflowError(p.sample_id, p.total_tokens, l_max)

    order = sorted(plans, key=lambda p: (-p.total_tokens, p.sample_id))
    members: list[list[str]] = []
    totals: list[int] = []
    heap: list[tuple[int, int]] = []  # (-remaining, pack_id)
    for p in order:
        if heap:
            neg_rem, pid = heap[0]
            if -neg_rem >= p.total_tokens:
                heapq.heapreplace(heap, (neg_rem + p.total_tokens, pid))
                members[pid].append(p.sample_id)
                totals[pid] += p.total_tokens
                continue
        pid = len(members)
        members.append([p.sample_id])
        totals.append(p.total_tokens)
        heapq.heappush(heap, (-(l_max - p.total_tokens), pid))

    return [
        PackedSequence(pack_id=i, member_ids=tuple(ids), total_tokens=t)
        for i, (ids, t) in enumerate(zip(members, totals))
    ]


@dataclass(frozen=True)
class BalanceReport:
    pack_count: int
    mean_utilization: float | None
    min_utilization: float | None
    max_utilization: float | None

    @property
    def defined(self) -> bool:
        return self.pack_count > 0


def balance_report(packs: list[PackedSequence], l_max: int) -> BalanceReport:
    """Exact utilization statistics (total_tokens / l_max) over the packs."""
    if not packs:
        return BalanceReport(0, None, None, None)
    utils = [p.total_tokens / l_max for p in packs]
    return BalanceReport(
        pack_count=len(packs),
        mean_utilization=sum(utils) / len(utils),
        min_utilization=min(utils),
        max_utilization=max(utils),
    )


def progressive_stages() -> list[StageConfig]:
    """The five-stage training schedule with progressively growing context length."""
    return [
        StageConfig("Stage-1", 4096, 1024, 2e-4, "connector", (1.0, 0.0)),
        StageConfig("Stage-1.5", 8192, 1024, 2e-5, "full", (1.0, 0.0)),
        StageConfig("Stage-2", 32768, 256, 2e-5, "full", (1.0, 1.0)),
        StageConfig("Stage-3", 65536, 128, 2e-5, "full", (1.0, 1.0)),
        StageConfig("Stage-4", 131072, 128, 2e-5, "full", (1.0, 1.0)),
    ]


def stage_to_obj(s: StageConfig) -> dict:
    return {
        "name": s.name,
        "l_max": s.l_max,
        "batch_size": s.batch_size,
        "learning_rate": s.learning_rate,
        "trainable_scope": s.trainable_scope,
        "mix_short_long": list(s.mix_short_long),
    }


def mix_datasets(
    short: list[SamplingPlan],
    long: list[SamplingPlan],
    ratio: tuple[float, float],
    seed: int,
) -> list[SamplingPlan]:
    """Seeded deterministic interleave of two plan streams at the given count ratio.

    Both streams are shuffled with the seed, then consumed so the emitted
    short:long counts track ratio as closely as possible; once a stream with
    positive ratio runs dry the other continues, so nothing is dropped. A
    zero ratio component excludes that stream entirely.
    """
    rs, rl = ratio
    if rs < 0 or rl < 0 or (rs == 0 and rl == 0):
        raise ValueError("ratio components must be non-negative and not both zero")
    rng = random.Random(seed)
    s = list(short)
    l = list(long)
    rng.shuffle(s)
    rng.shuffle(l)
    if rs == 0:
        return l
    if rl == 0:
        return s

    out: list[SamplingPlan] = []
    i = j = 0
    while i < len(s) or j < len(l):
        if i >= len(s):
            out.append(l[j]); j += 1
        elif j >= len(l):
            out.append(s[i]); i += 1
        # Emit from the stream lagging furthest behind its target share.
        elif (i + 1) * rl <= (j + 1) * rs:
            out.append(s[i]); i += 1
        else:
            out.append(l[j]); j += 1
    return out
