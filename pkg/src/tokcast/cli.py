"""Command line entry point: ``tokcast {tokenize,run,sweep-snr,sweep-cbr}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import frameio
from .metrics import psnr, report_csv, sweep_csv
from .sim import SimConfig, coerce_fields, load_config, load_input, run, sweep
from .tokenizer import TokenizerConfig, detokenize, tokenize


def _add_sim_flags(p):
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--input", help="PGM/PPM file or directory, raw file with sidecar, "
                   "or synthetic:{moving,static}:WxHxC")
    p.add_argument("--sidecar")
    p.add_argument("--frames", dest="num_frames", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--gop-size", type=int)
    p.add_argument("--cbr", type=float)
    p.add_argument("--snr", dest="snr_db", type=float)
    p.add_argument("--acm-table")
    p.add_argument("--bler", type=float)
    p.add_argument("--planning", choices=["per-frame", "gop"])
    p.add_argument("--fec", choices=["ideal", "repetition", "bypass"])
    p.add_argument("--repetition", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--coeffs", dest="coeffs_per_block", type=int)
    p.add_argument("--bits", dest="bits_per_token", type=int)
    p.add_argument("--boundary", choices=["copy-nearest", "hold-last"])
    p.add_argument("--mask-reference", choices=["previous-key", "receiver-mirror"])
    p.add_argument("--no-overhead", dest="charge_overhead", action="store_const", const=False)
    p.add_argument("--skip-empty", dest="send_empty", action="store_const", const=False)
    p.add_argument("--csv", dest="output_csv")
    p.add_argument("--dump-dir")
    p.add_argument("--no-figures", dest="figures", action="store_const", const=False)


_SIM_KEYS = [f for f in SimConfig.__dataclass_fields__]


def _config_from(args) -> SimConfig:
    overrides = {k: getattr(args, k) for k in _SIM_KEYS if getattr(args, k, None) is not None}
    if args.config:
        return load_config(args.config, **overrides)
    return SimConfig(**coerce_fields(overrides)).validate()


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_tokenize(args):
    cfg = TokenizerConfig(coeffs_per_block=args.coeffs, bits_per_token=args.bits)
    frames = frameio.load_frames(args.input, args.sidecar)
    lines = []
    for i, frame in enumerate(frames, 1):
        toks = tokenize(frame, cfg)
        rec = detokenize(toks, cfg, width=frame.width, height=frame.height,
                         channels=frame.channels)
        print(f"frame {i}: L={len(toks)} saturated={toks.saturated} "
              f"psnr={psnr(frame, rec):.2f} dB", file=sys.stderr)
        lines.append(" ".join(str(c) for c in toks.codes))
        if args.decode:
            out = Path(args.decode)
            if len(frames) > 1:
                out = out.with_name(f"{out.stem}_{i:05d}{out.suffix}")
            frameio.write_netpbm(out, rec)
    _emit("\n".join(lines) + "\n", args.output)


def cmd_run(args):
    cfg = _config_from(args)
    report = run(cfg)
    _emit(report_csv(report), cfg.output_csv)
    s = report.summary()
    print(f"cbr={s['cbr']:.4g} mean_psnr={s['mean_psnr']:.3f} dB key_frames={s['key_frames']} "
          f"fallbacks={s['fallbacks']} mean_K={s['mean_K']:.1f} "
          f"mcs={s['code_rate']}/{s['modulation']} B_t={s['budget_bits']}", file=sys.stderr)
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    if cfg.output_csv and cfg.figures:
        from .plotting import plot_run
        plot_run(report, Path(cfg.output_csv).with_suffix(".png"))


def _cmd_sweep(axis):
    def handler(args):
        cfg = _config_from(args)
        values = [float(v) for v in args.values.split(",") if v.strip()]
        frames = load_input(cfg)
        reports = sweep(cfg, axis, values, frames, jobs=args.jobs)
        _emit(sweep_csv(axis, values, reports), cfg.output_csv)
        if cfg.output_csv and cfg.figures:
            from .plotting import plot_sweep
            plot_sweep(axis, values, reports, Path(cfg.output_csv).with_suffix(".png"))
    return handler


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tokcast", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="tokenize frames and report reconstruction quality")
    p.add_argument("input")
    p.add_argument("--sidecar")
    p.add_argument("--coeffs", type=int, default=16)
    p.add_argument("--bits", type=int, default=12)
    p.add_argument("-o", "--output", help="token file, one line of codes per frame")
    p.add_argument("--decode", help="write the decoded frame(s) as PGM/PPM")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("run", help="simulate one stream")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_run)

    for axis, default in (("snr", "-2,0,2,4,6,8,10"), ("cbr", "1e-4,2e-4,4e-4,8e-4,1.6e-3")):
        p = sub.add_parser(f"sweep-{axis}", help=f"run once per {axis.upper()} value")
        _add_sim_flags(p)
        p.add_argument("--values", default=default, help="comma-separated list")
        p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=_cmd_sweep(axis))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
