"""Channel-use allocation, deliverable bits and budget-feasible top-K search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .diff_coder import ChangeMask

INFEASIBLE = -1


@dataclass(frozen=True)
class SymbolBudget:
    symbols_per_key_frame: int

    def __post_init__(self):
        if self.symbols_per_key_frame < 0:
            raise ValueError("symbol budget must be non-negative")


@dataclass
class GopPlan:
    gop_index: int
    key_indices: list
    per_frame_k: list = field(default_factory=list)

    @property
    def stabilized_k(self) -> int:
        return plan_gop(self.per_frame_k)


def allocate_symbols(cbr: float, pixels_per_frame: int, num_frames: int,
                     key_count: int) -> SymbolBudget:
    """Spread the total symbol allowance ``R*m*T`` uniformly over key frames."""
    if key_count < 1:
        raise ValueError("at least one key frame is required")
    total = cbr * pixels_per_frame * num_frames
    return SymbolBudget(int(math.floor(total / key_count)))


def deliverable_bits(mcs, symbols: int) -> int:
    """floor(code_rate * symbols * log2(M))."""
    if symbols < 0:
        raise ValueError("symbols must be non-negative")
    return int(math.floor(mcs.code_rate * symbols * mcs.bits_per_symbol))


def max_feasible_k(mask: ChangeMask, b_val: int, budget: int, overhead: int = 0) -> int:
    """Largest K with ``K + b_val*C(K) + overhead <= budget``.

    Returns ``INFEASIBLE`` when the overhead alone does not fit. The cost
    grows by 1 or 1+b_val per step, so a binary search on the prefix counts
    suffices.
    """
    avail = budget - overhead
    if avail < 0:
        return INFEASIBLE
    pc = mask.prefix_counts
    lo, hi = 0, len(mask)
    # invariant: cost(lo) <= avail; answer in [lo, hi]
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid + b_val * int(pc[mid]) <= avail:
            lo = mid
        else:
            hi = mid - 1
    return lo


def plan_gop(per_frame_k) -> int:
    """Stabilized prefix depth for a GOP: the smallest per-frame K*."""
    ks = list(per_frame_k)
    if not ks:
        raise ValueError("empty GOP")
    return min(ks)


def gop_partition(num_frames: int, gop_size: int) -> list:
    """1-based frame index ranges for each GOP, last one possibly short."""
    if gop_size < 1:
        raise ValueError("gop_size must be positive")
    return [range(start, min(start + gop_size, num_frames + 1))
            for start in range(1, num_frames + 1, gop_size)]
