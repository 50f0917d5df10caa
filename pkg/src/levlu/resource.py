"""Simulated warp/memory resource model and per-level execution planning.

The three kernel modes are resource-allocation policies selected by
level size: wide levels get many small blocks (few warps per column),
mid-size levels get full 32-warp blocks, and once a level shrinks to
the stream threshold each column gets a whole pipeline of its own.
On this CPU backend a "warp" is an abstract 32-lane work chunk used for
concurrency accounting, not a lockstep execution unit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .depgraph import LevelSchedule, LevelStats


class KernelMode(enum.Enum):
    SMALL_BLOCK = "SmallBlock"
    LARGE_BLOCK = "LargeBlock"
    STREAM = "Stream"


@dataclass(frozen=True)
class ResourceModel:
    total_warps: int = 96
    warp_width: int = 32
    max_warps_per_block: int = 32
    stream_threshold: int = 16
    stream_count: int = 16
    memory_budget_bytes: int = 1 << 30
    scalar_size_bytes: int = 8

    def __post_init__(self):
        if self.total_warps < 1:
            raise ValueError("total_warps must be >= 1")
        if self.stream_threshold < 1:
            raise ValueError("stream_threshold must be >= 1")


@dataclass(frozen=True)
class LevelPlan:
    mode: KernelMode
    warps_per_column: int
    max_parallel_columns: int
    concurrent_column_pipelines: int = 0


def warps_per_block(level_size: int, rm: ResourceModel) -> int:
    """Warps assigned to each column's block: total warps over level size,
    floored to a power of two and clamped to [2, 32]."""
    if level_size < 1:
        raise ValueError("level_size must be >= 1")
    raw = max(rm.total_warps // level_size, 1)
    w = 1 << (raw.bit_length() - 1)  # round down to power of two
    return min(max(w, 2), rm.max_warps_per_block)


def max_parallel_columns(n: int, rm: ResourceModel) -> int:
    """Memory-limited column concurrency: each in-flight column caches a
    dense length-n scratch array, so the budget bounds how many fit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(rm.memory_budget_bytes // (n * rm.scalar_size_bytes), 1)


def select_mode(level_size: int, rm: ResourceModel) -> KernelMode:
    """Pick the kernel mode for a level by its size.

    Stream once the size drops to the stream threshold; otherwise
    LargeBlock when full 32-warp blocks fit, SmallBlock when the warp
    budget forces narrower blocks.
    """
    if level_size < 1:
        raise ValueError("level_size must be >= 1")
    if level_size <= rm.stream_threshold:
        return KernelMode.STREAM
    if warps_per_block(level_size, rm) >= rm.max_warps_per_block:
        return KernelMode.LARGE_BLOCK
    return KernelMode.SMALL_BLOCK


def plan_schedule(
    s: LevelSchedule, stats: LevelStats, n: int, rm: ResourceModel
) -> list[LevelPlan]:
    """One LevelPlan per level; fills the mode column of ``stats``."""
    if stats.level_count != s.level_count:
        raise ValueError("stats do not match schedule")
    ncap = max_parallel_columns(n, rm)
    plans = []
    stats.modes = []
    for size in stats.sizes:
        mode = select_mode(size, rm)
        w = warps_per_block(size, rm)
        pipelines = min(size, rm.stream_count) if mode is KernelMode.STREAM else 0
        plans.append(LevelPlan(mode, w, ncap, pipelines))
        stats.modes.append(mode.value)
    return plans


def concurrency_cap(plan: LevelPlan, level_size: int, rm: ResourceModel) -> int:
    """Columns allowed in flight at once for a level under its plan."""
    if plan.mode is KernelMode.STREAM:
        cap = plan.concurrent_column_pipelines
    else:
        cap = rm.total_warps // plan.warps_per_column
    return max(1, min(cap, plan.max_parallel_columns, level_size))
