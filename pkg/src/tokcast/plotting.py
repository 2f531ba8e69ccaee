"""Report figures written next to the CSV outputs."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _finite(values, cap=100.0):
    return [math.nan if v is None else min(v, cap) for v in values]


def plot_run(report, path):
    """Per-frame PSNR (all frames) above the chosen K for each key frame."""
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 4.8), sharex=True)
        ts = [f.t for f in report.frames]
        ax1.plot(ts, _finite(report.psnr_per_frame), lw=1, color="0.3", label="all frames")
        keys = report.key_frames
        ax1.plot([f.t for f in keys], _finite([f.psnr for f in keys]), "o", ms=3,
                 color="C0", label="key frames")
        lost = [f for f in keys if f.status == "fallback"]
        if lost:
            ax1.plot([f.t for f in lost], _finite([f.psnr for f in lost]), "x", color="C3",
                     label="no-update fallback")
        ax1.set_ylabel("PSNR (dB)")
        ax1.legend(loc="lower right")
        ax2.step([f.t for f in keys], [f.k if f.k is not None else 0 for f in keys],
                 where="post", color="C1")
        ax2.set_ylabel("K (tokens)")
        ax2.set_xlabel("frame")
        ax1.set_title(f"CBR {report.cbr:.3g}, {report.modulation} rate {report.code_rate}, "
                      f"mean PSNR {report.mean_psnr:.2f} dB")
        fig.savefig(path)
        plt.close(fig)


def plot_sweep(axis, values, reports, path):
    """Mean PSNR and mean K against the swept SNR or CBR."""
    xlabel = {"snr": "SNR (dB)", "cbr": "CBR (symbols / pixel)"}[axis]
    with plt.rc_context(_STYLE):
        fig, ax1 = plt.subplots(figsize=(5.0, 3.4))
        xs = [float(v) for v in values]
        ax1.plot(xs, [r.mean_psnr for r in reports], "o-", color="C0")
        ax1.set_xlabel(xlabel)
        ax1.set_ylabel("mean PSNR (dB)", color="C0")
        ax2 = ax1.twinx()
        ax2.plot(xs, [r.mean_k for r in reports], "s--", color="C1", ms=3)
        ax2.set_ylabel("mean K", color="C1")
        ax2.grid(False)
        if axis == "cbr" and min(xs) > 0 and max(xs) / min(xs) > 20:
            ax1.set_xscale("log")
        fig.savefig(path)
        plt.close(fig)
