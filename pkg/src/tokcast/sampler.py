"""Stride key-frame selection and receiver-side temporal interpolation.

Frame indices are 1-based throughout, matching the stream numbering used in
CSV reports.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .tokenizer import Frame, GeometryError

BOUNDARY_MODES = ("copy-nearest", "hold-last")


@dataclass(frozen=True)
class SamplingPlan:
    num_frames: int
    stride: int
    key_indices: tuple
    gop_size: int = 32

    def is_key(self, t: int) -> bool:
        return 1 <= t <= self.num_frames and (t - 1) % self.stride == 0


@dataclass(frozen=True)
class Neighbors:
    before: int
    after: int = None
    alpha: float = None

    @property
    def needs_blend(self) -> bool:
        return self.after is not None and self.alpha is not None


def key_indices(num_frames: int, stride: int, gop_size: int = 32) -> SamplingPlan:
    if num_frames < 1 or stride < 1:
        raise ValueError("num_frames and stride must be positive")
    keys = tuple(range(1, num_frames + 1, stride))
    assert len(keys) == math.ceil(num_frames / stride)
    return SamplingPlan(num_frames, stride, keys, gop_size)


def neighbors(t: int, plan: SamplingPlan, boundary: str = "copy-nearest") -> Neighbors:
    """Surrounding key frames and blend weight for frame ``t``.

    Key frames map to themselves. Past the last key frame there is no right
    anchor: ``copy-nearest`` and ``hold-last`` both propagate the last key
    frame, the latter named for streams where later keys never arrive.
    """
    if boundary not in BOUNDARY_MODES:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    keys = plan.key_indices
    if not 1 <= t <= plan.num_frames:
        raise ValueError(f"frame {t} outside 1..{plan.num_frames}")
    i = bisect.bisect_right(keys, t) - 1
    before = keys[i]
    if before == t:
        return Neighbors(t)
    if i + 1 >= len(keys):
        return Neighbors(before)
    after = keys[i + 1]
    return Neighbors(before, after, (t - before) / (after - before))


def interpolate(frame_a: Frame, frame_b: Frame, alpha: float) -> Frame:
    """Per-pixel linear blend ``(1-alpha)*a + alpha*b``, rounded half-up."""
    if frame_a.samples.shape != frame_b.samples.shape:
        raise GeometryError("interpolation anchors differ in geometry")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 0.0:
        return Frame(frame_a.samples.copy())
    if alpha == 1.0:
        return Frame(frame_b.samples.copy())
    a = frame_a.samples.astype(np.float64)
    b = frame_b.samples.astype(np.float64)
    out = np.floor((1.0 - alpha) * a + alpha * b + 0.5)
    return Frame(np.clip(out, 0, 255).astype(np.uint8))
