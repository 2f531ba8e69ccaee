"""ACM table, Gray-mapped QPSK/16-QAM, AWGN channel and FEC stand-ins.

SNR values are per symbol (Es/N0) with unit average symbol energy, so the
complex noise variance is ``10**(-snr_db/10)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MODULATIONS = {"QPSK": 4, "16QAM": 16}


@dataclass(frozen=True)
class McsEntry:
    snr_threshold_db: float
    code_rate: float
    modulation_order: int

    def __post_init__(self):
        if not 0 < self.code_rate <= 1:
            raise ValueError(f"code rate {self.code_rate} outside (0, 1]")
        if self.modulation_order not in MODULATIONS.values():
            raise ValueError(f"unsupported modulation order {self.modulation_order}")

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.modulation_order))

    @property
    def spectral_efficiency(self) -> float:
        return self.code_rate * self.bits_per_symbol

    @property
    def modulation_name(self) -> str:
        return {4: "QPSK", 16: "16QAM"}[self.modulation_order]


DEFAULT_ACM_ROWS = (
    McsEntry(-2.0, 0.245, 4),
    McsEntry(0.0, 0.301, 4),
    McsEntry(2.0, 0.514, 4),
    McsEntry(4.0, 0.663, 4),
    McsEntry(6.0, 0.424, 16),
    McsEntry(8.0, 0.540, 16),
    McsEntry(10.0, 0.643, 16),
)
DEFAULT_BLER_TARGET = 0.002


@dataclass
class AcmTable:
    rows: tuple = DEFAULT_ACM_ROWS
    bler_target: float = DEFAULT_BLER_TARGET

    def __post_init__(self):
        self.rows = tuple(self.rows)
        if not self.rows:
            raise ValueError("ACM table is empty")
        if not 0 < self.bler_target < 1:
            raise ValueError("BLER target must lie in (0, 1)")
        th = [r.snr_threshold_db for r in self.rows]
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError("ACM rows must have strictly increasing SNR thresholds")
        eff = [r.spectral_efficiency for r in self.rows]
        if any(b < a for a, b in zip(eff, eff[1:])):
            raise ValueError("spectral efficiency must not decrease down the table")

    @classmethod
    def from_file(cls, path, bler_target: float = DEFAULT_BLER_TARGET) -> "AcmTable":
        """Load ``snr_db code_rate modulation`` rows (comma or whitespace separated)."""
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in re.split(r"[,\s]+", line) if p]
            if parts[0].lower().startswith("snr"):
                continue
            if len(parts) < 3:
                raise ValueError(f"{path}:{lineno}: expected snr_db, code_rate, modulation")
            mod = parts[2].upper().replace("-", "")
            order = MODULATIONS.get(mod)
            if order is None:
                order = int(mod)
            rows.append(McsEntry(float(parts[0]), float(parts[1]), order))
        return cls(tuple(rows), bler_target)


@dataclass(frozen=True)
class ChannelEstimate:
    snr_db: float


def select_mcs(est: ChannelEstimate, table: AcmTable = None) -> McsEntry:
    """Highest row whose threshold does not exceed the SNR, else the lowest row."""
    table = table or AcmTable()
    chosen = table.rows[0]
    for row in table.rows:
        if row.snr_threshold_db <= est.snr_db:
            chosen = row
    return chosen


# Gray-coded 16-QAM axis levels indexed by the two-bit value (b_hi, b_lo).
_PAM4_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])  # 00, 01, 10, 11


def constellation(order: int) -> tuple:
    """All constellation points and their bit labels, in label order."""
    k = _bits_per_symbol(order)
    labels = np.array([[(i >> (k - 1 - j)) & 1 for j in range(k)] for i in range(order)],
                      dtype=np.uint8)
    return modulate(labels.ravel(), order), labels


def _bits_per_symbol(order: int) -> int:
    if order not in MODULATIONS.values():
        raise ValueError(f"unsupported modulation order {order}")
    return int(math.log2(order))


def pad_bits(bits, order: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    pad = -bits.size % _bits_per_symbol(order)
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return bits


def modulate(bits, order: int) -> np.ndarray:
    """Map bits to unit-energy Gray QPSK or 16-QAM symbols, zero-padding the tail."""
    bits = pad_bits(bits, order).astype(np.int64)
    if order == 4:
        b = bits.reshape(-1, 2)
        return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2.0)
    b = bits.reshape(-1, 4)
    i = _PAM4_LEVELS[2 * b[:, 0] + b[:, 1]]
    q = _PAM4_LEVELS[2 * b[:, 2] + b[:, 3]]
    return (i + 1j * q) / np.sqrt(10.0)


def _pam4_decide(x: np.ndarray) -> np.ndarray:
    # nearest of -3, -1, 1, 3 -> bits (hi, lo); Gray: hi = sign, lo = inner
    hi = (x > 0).astype(np.uint8)
    lo = (np.abs(x) < 2).astype(np.uint8)
    return np.stack([hi, lo], axis=1)


def demodulate(symbols, order: int) -> np.ndarray:
    """Hard-decision nearest-point demapping back to bits."""
    s = np.asarray(symbols, dtype=np.complex128).ravel()
    if order == 4:
        return np.stack([(s.real < 0), (s.imag < 0)], axis=1).astype(np.uint8).ravel()
    if order == 16:
        scaled = s * np.sqrt(10.0)
        return np.concatenate([_pam4_decide(scaled.real), _pam4_decide(scaled.imag)],
                              axis=1).ravel()
    raise ValueError(f"unsupported modulation order {order}")


def awgn(symbols, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add complex white Gaussian noise at the given Es/N0; ``inf`` bypasses."""
    s = np.asarray(symbols, dtype=np.complex128)
    if math.isinf(snr_db) and snr_db > 0:
        return s.copy()
    sigma2 = 10.0 ** (-snr_db / 10.0)
    scale = math.sqrt(sigma2 / 2.0)
    noise = rng.standard_normal(s.shape) + 1j * rng.standard_normal(s.shape)
    return s + scale * noise


class FecError(ValueError):
    """Payload does not fit the deliverable bit budget."""


def _check_budget(bits: np.ndarray, budget):
    if budget is not None and bits.size > budget:
        raise FecError(f"payload of {bits.size} bits exceeds budget of {budget} bits")


class BypassFec:
    """Uncoded: bits go straight to the modulator and face the raw channel."""

    name = "bypass"
    replaces_channel = False

    def encode(self, bits, mcs: McsEntry, budget: int = None) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        _check_budget(bits, budget)
        return bits

    def decode(self, bits, mcs: McsEntry, n_bits: int, rng=None) -> tuple:
        return np.asarray(bits, dtype=np.uint8)[:n_bits], True


@dataclass
class IdealFec:
    """Capacity-achieving code run exactly at its BLER target.

    The payload passes through unchanged and the AWGN draw is skipped
    (``replaces_channel``): each block independently fails
    with probability ``bler``. A failed block is returned with its bits
    scrambled so a downstream CRC sees the corruption too.
    """

    bler: float = DEFAULT_BLER_TARGET
    name: str = field(default="ideal", init=False)
    replaces_channel: bool = field(default=True, init=False)

    def encode(self, bits, mcs: McsEntry, budget: int = None) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        _check_budget(bits, budget)
        return bits

    def decode(self, bits, mcs: McsEntry, n_bits: int, rng: np.random.Generator) -> tuple:
        out = np.asarray(bits, dtype=np.uint8)[:n_bits].copy()
        failed = self.bler > 0 and rng.random() < self.bler
        if failed:
            out ^= rng.integers(0, 2, out.size, dtype=np.uint8)
        return out, not failed


@dataclass
class RepetitionFec:
    """Each bit repeated ``r`` times, majority-decoded (ties keep the first copy).

    ``r`` defaults to ``floor(1/code_rate)`` for the active MCS; the
    effective rate ``1/r`` is generally not the table rate, see
    ``rate_mismatch``.
    """

    repeats: int = None
    name: str = field(default="repetition", init=False)
    replaces_channel: bool = field(default=False, init=False)

    def factor(self, mcs: McsEntry) -> int:
        return self.repeats or max(1, int(math.floor(1.0 / mcs.code_rate)))

    def rate_mismatch(self, mcs: McsEntry) -> float:
        return 1.0 / self.factor(mcs) - mcs.code_rate

    def encode(self, bits, mcs: McsEntry, budget: int = None) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        _check_budget(bits, budget)
        return np.repeat(bits, self.factor(mcs))

    def decode(self, bits, mcs: McsEntry, n_bits: int, rng=None) -> tuple:
        r = self.factor(mcs)
        b = np.asarray(bits, dtype=np.int64)[: n_bits * r].reshape(n_bits, r)
        votes = b.sum(axis=1)
        out = np.where(2 * votes == r, b[:, 0], 2 * votes > r).astype(np.uint8)
        return out, True


def make_fec(mode: str, bler: float = DEFAULT_BLER_TARGET, repeats: int = None):
    if mode == "ideal":
        return IdealFec(bler)
    if mode == "repetition":
        return RepetitionFec(repeats)
    if mode == "bypass":
        return BypassFec()
    raise ValueError(f"unknown FEC mode {mode!r}")

