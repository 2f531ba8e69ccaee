"""Binary change masks and the K-limited header/body frame packet.

Wire layout, most-significant bit first throughout::

    [K: 16 bits BE][header: K bits][body: b_val * C(K) bits][CRC-16: 16 bits][zero pad to byte]

The CRC is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no
final xor) computed over K||header||body. Covering the K field matters: with
zero padding and no final xor, a K corrupted upward over zero bits would
otherwise re-parse as a different but valid packet.
"""
from __future__ import annotations

import binascii
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tokenizer import TokenSequence

K_FIELD_BITS = 16
CRC_BITS = 16
FRAMING_OVERHEAD_BITS = K_FIELD_BITS + CRC_BITS
MAX_K = (1 << K_FIELD_BITS) - 1


@dataclass
class ChangeMask:
    bits: np.ndarray
    prefix_counts: np.ndarray

    def __len__(self):
        return self.bits.size

    @classmethod
    def from_bits(cls, bits) -> "ChangeMask":
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        pc = np.zeros(bits.size + 1, dtype=np.int64)
        np.cumsum(bits, out=pc[1:])
        return cls(bits, pc)

    @classmethod
    def all_ones(cls, length: int) -> "ChangeMask":
        return cls.from_bits(np.ones(length, dtype=np.uint8))

    def count(self, k: int) -> int:
        """Number of changed positions among the first ``k``."""
        return int(self.prefix_counts[k])


@dataclass
class FramePacket:
    k_limit: int
    header_bits: np.ndarray
    body_bits: np.ndarray
    crc: int
    payload: np.ndarray

    @property
    def net_bits(self) -> int:
        """Source bits charged by the frame-cost formula (header + body)."""
        return self.header_bits.size + self.body_bits.size

    @property
    def gross_bits(self) -> int:
        """Net bits plus the K field and CRC, excluding byte padding."""
        return self.net_bits + FRAMING_OVERHEAD_BITS

    def to_bytes(self) -> bytes:
        return np.packbits(self.payload).tobytes()


@dataclass
class UnpackResult:
    k_limit: int
    mask_bits: np.ndarray
    values: np.ndarray
    crc_ok: bool
    short_read: bool = False
    malformed: bool = False

    @property
    def expected_values(self) -> int:
        return int(self.mask_bits.sum())


def change_mask(current: TokenSequence, reference: TokenSequence) -> ChangeMask:
    if len(current) != len(reference):
        raise ValueError(f"length mismatch: {len(current)} vs {len(reference)}")
    return ChangeMask.from_bits(current.codes != reference.codes)


def frame_cost(k: int, mask: ChangeMask, b_val: int) -> int:
    """Header plus body bits for a top-``k`` packet."""
    if not 0 <= k <= len(mask):
        raise ValueError(f"K={k} outside 0..{len(mask)}")
    return k + b_val * int(mask.prefix_counts[k])


@lru_cache(maxsize=None)
def _shifts(width: int) -> np.ndarray:
    return np.arange(width - 1, -1, -1, dtype=np.int64)


@lru_cache(maxsize=None)
def _weights(width: int) -> np.ndarray:
    return np.int64(1) << _shifts(width)


def int_to_bits(values, width: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64).ravel()
    return ((values[:, None] >> _shifts(width)) & 1).astype(np.uint8).ravel()


def bits_to_int(bits, width: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, width)
    return bits @ _weights(width)


def _uint_bits(value: int, width: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(value.to_bytes(width // 8, "big"), np.uint8))


def _read_uint(bits: np.ndarray, start: int, width: int) -> int:
    value = 0
    for b in bits[start:start + width].tolist():
        value = (value << 1) | b
    return value


def crc16(bits) -> int:
    """CRC-16/CCITT-FALSE over an arbitrary-length MSB-first bit sequence."""
    bits = np.asarray(bits, dtype=np.uint8)
    whole = bits.size - bits.size % 8
    crc = binascii.crc_hqx(np.packbits(bits[:whole]).tobytes(), 0xFFFF)
    for bit in bits[whole:].tolist():
        top = ((crc >> 15) & 1) ^ bit
        crc = (crc << 1) & 0xFFFF
        if top:
            crc ^= 0x1021
    return crc


def pack(tokens: TokenSequence, mask: ChangeMask, k: int, b_val: int) -> FramePacket:
    """Serialize the top-``k`` header and the changed values into a packet."""
    if not 0 <= k <= len(tokens):
        raise ValueError(f"K={k} exceeds token length {len(tokens)}")
    if len(mask) != len(tokens):
        raise ValueError("mask and token lengths differ")
    if k > MAX_K:
        raise ValueError(f"K={k} does not fit the {K_FIELD_BITS}-bit K field")
    header = mask.bits[:k].astype(np.uint8)
    values = tokens.codes[:k][header != 0]
    # negatives wrap to huge unsigned values, so one shift catches both ends
    if values.size and np.any(values.astype(np.uint64) >> np.uint64(b_val)):
        raise ValueError(f"token code outside {b_val}-bit range")
    body = int_to_bits(values, b_val)
    protected = np.concatenate([_uint_bits(k, K_FIELD_BITS), header, body])
    crc = crc16(protected)
    pad = np.zeros(-(protected.size + CRC_BITS) % 8, dtype=np.uint8)
    payload = np.concatenate([protected, _uint_bits(crc, CRC_BITS), pad])
    return FramePacket(k, header, body, crc, payload)


def unpack(payload, b_val: int, max_k: int = None) -> UnpackResult:
    """Parse a packet bitstream.

    A body cut short returns the values actually present with
    ``short_read=True``; the CRC cannot be verified then and ``crc_ok`` is
    False. A payload too short for its K field or header, or whose K exceeds
    ``max_k``, comes back ``malformed``. So does one whose length disagrees
    with the parsed K and header (anything besides zero padding up to the
    next byte after the CRC): the CRC window depends on the header, so a
    corrupted header could otherwise be checked against the wrong bits.
    """
    bits = np.asarray(payload, dtype=np.uint8).ravel()
    empty = np.zeros(0, dtype=np.uint8)
    if bits.size < K_FIELD_BITS:
        return UnpackResult(0, empty, np.zeros(0, np.int64), False, short_read=True, malformed=True)
    k = _read_uint(bits, 0, K_FIELD_BITS)
    pos = K_FIELD_BITS
    if (max_k is not None and k > max_k) or bits.size < pos + k:
        return UnpackResult(k, empty, np.zeros(0, np.int64), False,
                            short_read=bits.size < pos + k, malformed=True)
    header = bits[pos:pos + k]
    pos += k
    ones = int(np.count_nonzero(header))
    available = min(ones, (bits.size - pos) // b_val)
    values = bits_to_int(bits[pos:pos + available * b_val], b_val) if available else np.zeros(0, np.int64)
    if available < ones:
        return UnpackResult(k, header, values, False, short_read=True)
    body_end = pos + ones * b_val
    if bits.size < body_end + CRC_BITS:
        return UnpackResult(k, header, values, False, short_read=True)
    end = body_end + CRC_BITS
    if bits.size != end + (-end % 8) or bits[end:].any():
        return UnpackResult(k, header, values, False, malformed=True)
    crc_ok = _read_uint(bits, body_end, CRC_BITS) == crc16(bits[:body_end])
    return UnpackResult(k, header, values, crc_ok)
