"""Running token state at the receiver."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .diff_coder import unpack
from .tokenizer import ZERO_TOKEN, Frame, TokenizerConfig, TokenSequence, detokenize, zero_state


class Status(str, enum.Enum):
    UPDATED = "updated"
    FALLBACK = "fallback"
    SHORT_READ_PADDED = "short_read_padded"


@dataclass
class ReceiverState:
    tokens: TokenSequence
    last_frame_ok: bool = True
    frames_updated: int = 0
    fallbacks: int = 0
    short_reads: int = 0

    @classmethod
    def fresh(cls, length: int, bits_per_token: int = 12) -> "ReceiverState":
        return cls(zero_state(length, bits_per_token))

    def reset(self):
        """Return to the zero state at a GOP boundary; counters are kept."""
        self.tokens = zero_state(len(self.tokens), self.tokens.bits_per_token)
        self.last_frame_ok = True

    def mark_lost(self) -> Status:
        """Record a frame whose block the channel decoder already rejected."""
        self.last_frame_ok = False
        self.fallbacks += 1
        return Status.FALLBACK


def apply_update(codes: np.ndarray, mask_bits: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Overwrite flagged positions of the top-K prefix in order; missing values get the zero flag."""
    out = codes.copy()
    positions = np.flatnonzero(mask_bits)
    filled = np.full(positions.size, ZERO_TOKEN, dtype=np.int64)
    filled[: values.size] = values[: positions.size]
    out[positions] = filled
    return out


def receive_frame(state: ReceiverState, payload, b_val: int,
                  allow_short_read: bool = True) -> tuple:
    """Apply one received packet to ``state`` in place and return ``(state, status)``.

    A CRC failure or a malformed packet (K beyond the state length, header
    cut short) leaves the tokens untouched. A body cut short still applies
    the values that arrived and zero-flags the rest, unless
    ``allow_short_read`` is False: a corrupted header can also look like a
    short body, so links that never truncate should refuse short reads.
    """
    length = len(state.tokens)
    parsed = unpack(payload, b_val, max_k=length)
    if parsed.short_read and not allow_short_read:
        return state, state.mark_lost()
    if parsed.malformed or (not parsed.crc_ok and not parsed.short_read):
        return state, state.mark_lost()
    state.tokens = TokenSequence(apply_update(state.tokens.codes, parsed.mask_bits, parsed.values),
                                 state.tokens.bits_per_token)
    state.frames_updated += 1
    state.last_frame_ok = True
    if parsed.short_read:
        state.short_reads += 1
        return state, Status.SHORT_READ_PADDED
    return state, Status.UPDATED


def reconstruct(state: ReceiverState, cfg: TokenizerConfig, *, width: int, height: int,
                channels: int) -> Frame:
    return detokenize(state.tokens, cfg, width=width, height=height, channels=channels)
