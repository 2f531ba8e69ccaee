"""Importance-ordered block-transform tokenizer.

Each key frame is cut into 8x8 blocks per channel, transformed with an
orthonormal 2D DCT-II, and the first ``D`` zigzag coefficients of every block
are mid-tread quantized. Tokens are emitted subband-major: coefficient 0 of
every block (channel-major, then block raster order) first, then coefficient
1, and so on. Position order is the importance order, so any prefix of the
sequence decodes to a valid, progressively refined frame.

Code 0 is reserved as the zero-flag token (``ZERO_TOKEN``). Quantized values
``q`` are stored as ``q + 2**(b_val - 1)`` which places them in
``1 .. 2**b_val - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

ZERO_TOKEN = 0

# JPEG Annex K luminance table (quality 50), listed in zigzag order.
_JPEG_LUMA_ZIGZAG = (
    16, 11, 12, 14, 12, 10, 16, 14, 13, 14, 18, 17, 16, 19, 24, 40,
    26, 24, 22, 22, 24, 49, 35, 37, 29, 40, 58, 51, 61, 60, 57, 51,
    56, 55, 64, 72, 92, 78, 64, 68, 87, 69, 55, 56, 80, 109, 81, 87,
    95, 98, 103, 104, 103, 62, 77, 113, 121, 112, 100, 120, 92, 101, 103, 99,
)


class GeometryError(ValueError):
    """Frame or token-sequence geometry does not match the tokenizer config."""


@dataclass
class Frame:
    """One video frame, samples stored as an (height, width, channels) uint8 array."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim == 2:
            s = s[:, :, None]
        if s.ndim != 3 or s.shape[2] not in (1, 3):
            raise GeometryError(f"expected HxWx1 or HxWx3 samples, got shape {s.shape}")
        self.samples = s

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    @property
    def num_pixels(self) -> int:
        return self.samples.size

    @classmethod
    def from_flat(cls, data, width: int, height: int, channels: int) -> "Frame":
        arr = np.frombuffer(bytes(data), dtype=np.uint8) if isinstance(data, (bytes, bytearray)) \
            else np.asarray(data, dtype=np.uint8)
        if arr.size != width * height * channels:
            raise GeometryError(
                f"{arr.size} samples do not fill {width}x{height}x{channels}")
        return cls(arr.reshape(height, width, channels).copy())

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.samples.shape == other.samples.shape and np.array_equal(self.samples, other.samples)


@dataclass
class TokenizerConfig:
    block_size: int = 8
    coeffs_per_block: int = 16
    bits_per_token: int = 12
    quant_steps: tuple = None

    def __post_init__(self):
        n2 = self.block_size ** 2
        if not 1 <= self.coeffs_per_block <= n2:
            raise ValueError(f"coeffs_per_block must be in 1..{n2}")
        if self.bits_per_token < 1 or 2 ** self.bits_per_token < 2:
            raise ValueError("bits_per_token must leave room for the zero flag and one value code")
        if self.quant_steps is None:
            if self.block_size == 8:
                steps = _JPEG_LUMA_ZIGZAG[: self.coeffs_per_block]
            else:
                steps = (16.0,) * self.coeffs_per_block
            self.quant_steps = tuple(float(s) for s in steps)
        self.quant_steps = tuple(float(s) for s in self.quant_steps)
        if len(self.quant_steps) != self.coeffs_per_block:
            raise ValueError("quant_steps must have one entry per coefficient")
        if any(s <= 0 for s in self.quant_steps):
            raise ValueError("quant_steps must be positive")

    @property
    def offset(self) -> int:
        return 1 << (self.bits_per_token - 1)

    @property
    def q_min(self) -> int:
        return 1 - self.offset

    @property
    def q_max(self) -> int:
        return (1 << self.bits_per_token) - 1 - self.offset

    def num_tokens(self, width: int, height: int, channels: int) -> int:
        nb = (width // self.block_size) * (height // self.block_size)
        return channels * nb * self.coeffs_per_block

    def geometry_for(self, length: int, width: int, height: int, channels: int):
        if length != self.num_tokens(width, height, channels):
            raise GeometryError(
                f"{length} tokens do not match {width}x{height}x{channels} "
                f"with D={self.coeffs_per_block}")


@dataclass
class TokenSequence:
    """Importance-ordered token codes for one frame.

    ``saturated`` counts coefficients that were clipped to the code range
    during tokenization; it is a statistic, not an error.
    """

    codes: np.ndarray
    bits_per_token: int = 12
    saturated: int = field(default=0, compare=False)

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.int64).ravel()

    def __len__(self):
        return self.codes.size

    def __eq__(self, other):
        if not isinstance(other, TokenSequence):
            return NotImplemented
        return self.bits_per_token == other.bits_per_token and np.array_equal(self.codes, other.codes)

    def copy(self) -> "TokenSequence":
        return TokenSequence(self.codes.copy(), self.bits_per_token, self.saturated)

    def prefix(self, length: int) -> "TokenSequence":
        """Keep the first ``length`` tokens and zero-flag the rest."""
        codes = np.full_like(self.codes, ZERO_TOKEN)
        codes[:length] = self.codes[:length]
        return TokenSequence(codes, self.bits_per_token)


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis; rows are frequencies."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    m = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    m[0] /= np.sqrt(2.0)
    return m


@lru_cache(maxsize=None)
def zigzag_order(n: int) -> tuple:
    """(row, col) pairs of an n x n block in JPEG zigzag order."""
    cells = [(r, c) for r in range(n) for c in range(n)]

    def key(rc):
        r, c = rc
        s = r + c
        return (s, r if s % 2 else c)

    return tuple(sorted(cells, key=key))


def _check_frame(frame: Frame, cfg: TokenizerConfig):
    b = cfg.block_size
    if frame.width % b or frame.height % b:
        raise GeometryError(
            f"frame {frame.width}x{frame.height} is not a multiple of block size {b}")


def _to_blocks(planes: np.ndarray, b: int) -> np.ndarray:
    # (C, H, W) -> (C, H/b, W/b, b, b)
    c, h, w = planes.shape
    return planes.reshape(c, h // b, b, w // b, b).transpose(0, 1, 3, 2, 4)


def _from_blocks(blocks: np.ndarray) -> np.ndarray:
    c, bh, bw, b, _ = blocks.shape
    return blocks.transpose(0, 1, 3, 2, 4).reshape(c, bh * b, bw * b)


def forward_coefficients(frame: Frame, cfg: TokenizerConfig) -> np.ndarray:
    """Unquantized kept coefficients, shape (D, C, H/b, W/b)."""
    _check_frame(frame, cfg)
    b = cfg.block_size
    m = dct_matrix(b)
    planes = np.moveaxis(frame.samples.astype(np.float64), 2, 0)
    coef = np.einsum("ij,...jk,lk->...il", m, _to_blocks(planes, b), m, optimize=True)
    zz = zigzag_order(b)[: cfg.coeffs_per_block]
    rows = np.array([r for r, _ in zz])
    cols = np.array([c for _, c in zz])
    return np.moveaxis(coef[..., rows, cols], -1, 0)


def tokenize(frame: Frame, cfg: TokenizerConfig = None) -> TokenSequence:
    """Map a frame to its importance-ordered token sequence."""
    cfg = cfg or TokenizerConfig()
    coef = forward_coefficients(frame, cfg)
    steps = np.asarray(cfg.quant_steps).reshape(-1, 1, 1, 1)
    # exact .5 ties round up even when the transform lands a hair below them
    q = np.floor(coef / steps + 0.5 + 1e-9)
    clipped = np.clip(q, cfg.q_min, cfg.q_max)
    saturated = int(np.count_nonzero(clipped != q))
    codes = (clipped + cfg.offset).astype(np.int64).ravel()
    return TokenSequence(codes, cfg.bits_per_token, saturated)


def dequantize(tokens: TokenSequence, cfg: TokenizerConfig, channels: int,
               height: int, width: int) -> np.ndarray:
    """Coefficient values (D, C, H/b, W/b); zero-flag tokens become 0."""
    cfg.geometry_for(len(tokens), width, height, channels)
    b = cfg.block_size
    codes = tokens.codes.reshape(cfg.coeffs_per_block, channels, height // b, width // b)
    q = np.where(codes == ZERO_TOKEN, 0, codes - cfg.offset).astype(np.float64)
    return q * np.asarray(cfg.quant_steps).reshape(-1, 1, 1, 1)


def reconstruct_signal(tokens: TokenSequence, cfg: TokenizerConfig, width: int,
                       height: int, channels: int) -> np.ndarray:
    """Real-valued decoder output (H, W, C) before clamping and 8-bit rounding.

    The transform is orthonormal, so squared error here equals squared
    coefficient error; this is the domain in which prefix decoding is
    exactly monotone.
    """
    b = cfg.block_size
    coef_kept = dequantize(tokens, cfg, channels, height, width)
    full = np.zeros((channels, height // b, width // b, b, b))
    for k, (r, c) in enumerate(zigzag_order(b)[: cfg.coeffs_per_block]):
        full[..., r, c] = coef_kept[k]
    m = dct_matrix(b)
    blocks = np.einsum("ji,...jk,kl->...il", m, full, m, optimize=True)
    return np.moveaxis(_from_blocks(blocks), 0, 2)


def render(signal: np.ndarray) -> Frame:
    """Round half-up and clamp a real-valued reconstruction into an 8-bit frame."""
    return Frame(np.clip(np.floor(signal + 0.5), 0, 255).astype(np.uint8))


def detokenize(tokens: TokenSequence, cfg: TokenizerConfig = None, *, width: int,
               height: int, channels: int = 1) -> Frame:
    """Decode a (possibly partially zero-flagged) token sequence to a frame."""
    cfg = cfg or TokenizerConfig()
    return render(reconstruct_signal(tokens, cfg, width, height, channels))


def zero_state(length: int, bits_per_token: int = 12) -> TokenSequence:
    if length < 0:
        raise ValueError("length must be non-negative")
    return TokenSequence(np.full(length, ZERO_TOKEN, dtype=np.int64), bits_per_token)
