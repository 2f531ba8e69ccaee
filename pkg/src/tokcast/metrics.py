"""CBR, PSNR and per-run reporting.

Per-frame CSV columns, in this fixed order::

    t, is_key, K, bits_net, bits_gross, crc_ok, psnr, clip, lpips

``clip`` and ``lpips`` are always empty; they are reserved so perceptual
scores computed by external tools can be merged in by column. Non-key rows
leave K, bit counts and crc_ok empty. A final row with ``t = summary``
carries: key-frame count, mean K over transmitted key frames, total net and
gross bits, number of CRC-passing key frames, and mean PSNR.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("t", "is_key", "K", "bits_net", "bits_gross", "crc_ok", "psnr", "clip", "lpips")
SWEEP_COLUMNS = ("axis", "value", "cbr", "mean_psnr", "key_frames", "fallbacks", "mean_K",
                 "code_rate", "modulation", "symbols_per_key", "budget_bits", "bits_net", "bits_gross")


def cbr(symbol_counts, pixels_per_frame: int, num_frames: int = None) -> float:
    """Average channel symbols per source pixel over the whole sequence."""
    counts = np.asarray(symbol_counts, dtype=np.float64)
    t = counts.size if num_frames is None else num_frames
    if t != counts.size:
        raise ValueError(f"expected {t} symbol counts, got {counts.size}")
    if t == 0:
        return 0.0
    return float(counts.sum() / (pixels_per_frame * t))


def mse(a, b) -> float:
    sa = getattr(a, "samples", a)
    sb = getattr(b, "samples", b)
    if np.shape(sa) != np.shape(sb):
        raise ValueError("geometry mismatch")
    d = np.asarray(sa, dtype=np.float64) - np.asarray(sb, dtype=np.float64)
    return float(np.mean(d * d))


def psnr(a, b, peak: float = 255.0) -> float:
    """PSNR in dB; ``inf`` for identical inputs."""
    err = mse(a, b)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


@dataclass
class FrameRecord:
    t: int
    is_key: bool
    k: int = None
    bits_net: int = None
    bits_gross: int = None
    crc_ok: bool = None
    psnr: float = None
    symbols: int = 0
    status: str = ""


@dataclass
class RunReport:
    frames: list = field(default_factory=list)
    pixels_per_frame: int = 0
    code_rate: float = None
    modulation: str = ""
    symbols_per_key: int = 0
    budget_bits: int = 0
    notes: list = field(default_factory=list)

    @property
    def cbr(self) -> float:
        return cbr([f.symbols for f in self.frames], self.pixels_per_frame)

    @property
    def psnr_per_frame(self) -> list:
        return [f.psnr for f in self.frames]

    @property
    def mean_psnr(self) -> float:
        """Mean over frames; identical frames (inf) count at 100 dB to keep the mean finite."""
        vals = [min(p, 100.0) for p in self.psnr_per_frame if p is not None]
        return float(np.mean(vals)) if vals else math.nan

    @property
    def key_frames(self) -> list:
        return [f for f in self.frames if f.is_key]

    @property
    def frame_fallbacks(self) -> int:
        return sum(1 for f in self.key_frames if f.status == "fallback")

    @property
    def bits_sent_net(self) -> int:
        return sum(f.bits_net or 0 for f in self.key_frames)

    @property
    def bits_sent_gross(self) -> int:
        return sum(f.bits_gross or 0 for f in self.key_frames)

    @property
    def k_chosen_per_frame(self) -> list:
        return [f.k for f in self.key_frames]

    @property
    def mean_k(self) -> float:
        ks = [k for k in self.k_chosen_per_frame if k is not None and k >= 0]
        return float(np.mean(ks)) if ks else 0.0

    def summary(self) -> dict:
        return {
            "cbr": self.cbr,
            "mean_psnr": self.mean_psnr,
            "key_frames": len(self.key_frames),
            "fallbacks": self.frame_fallbacks,
            "mean_K": self.mean_k,
            "code_rate": self.code_rate,
            "modulation": self.modulation,
            "symbols_per_key": self.symbols_per_key,
            "budget_bits": self.budget_bits,
            "bits_net": self.bits_sent_net,
            "bits_gross": self.bits_sent_gross,
        }


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.6g}"
    return v


def report_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for f in report.frames:
        w.writerow([f.t, int(f.is_key), _fmt(f.k), _fmt(f.bits_net), _fmt(f.bits_gross),
                    _fmt(f.crc_ok), _fmt(f.psnr), "", ""])
    keys = report.key_frames
    w.writerow(["summary", len(keys), _fmt(report.mean_k), report.bits_sent_net,
                report.bits_sent_gross, sum(1 for f in keys if f.crc_ok),
                _fmt(report.mean_psnr), "", ""])
    return buf.getvalue()


def sweep_csv(axis: str, values, reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for v, rep in zip(values, reports):
        s = rep.summary()
        w.writerow([axis, _fmt(float(v))] + [_fmt(s[c]) for c in SWEEP_COLUMNS[2:]])
    return buf.getvalue()
