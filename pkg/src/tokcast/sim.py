"""End-to-end key-frame transmission simulator and parameter sweeps."""
from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import frameio
from .diff_coder import FRAMING_OVERHEAD_BITS, MAX_K, ChangeMask, change_mask, pack
from .metrics import FrameRecord, RunReport, psnr
from .phy import AcmTable, ChannelEstimate, demodulate, make_fec, modulate, select_mcs, awgn
from .rate_planner import INFEASIBLE, allocate_symbols, deliverable_bits, gop_partition, \
    max_feasible_k, plan_gop
from .receiver import ReceiverState, Status, apply_update, receive_frame, reconstruct
from .sampler import interpolate, key_indices, neighbors
from .tokenizer import TokenizerConfig, TokenSequence, tokenize, zero_state

log = logging.getLogger(__name__)

PLANNING_MODES = ("per-frame", "gop")
MASK_REFERENCES = ("previous-key", "receiver-mirror")


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    input: str = "synthetic:moving:64x64x1"
    sidecar: str = None
    num_frames: int = None
    stride: int = 1
    gop_size: int = 32
    cbr: float = 4e-4
    snr_db: float = 6.0
    acm_table: str = None
    bler: float = 0.002
    planning: str = "per-frame"
    fec: str = "ideal"
    repetition: int = None
    seed: int = 0
    coeffs_per_block: int = 16
    bits_per_token: int = 12
    boundary: str = "copy-nearest"
    mask_reference: str = "previous-key"
    charge_overhead: bool = True
    send_empty: bool = True
    output_csv: str = None
    dump_dir: str = None
    figures: bool = True

    def validate(self):
        if self.planning not in PLANNING_MODES:
            raise ConfigError(f"planning must be one of {PLANNING_MODES}")
        if self.mask_reference not in MASK_REFERENCES:
            raise ConfigError(f"mask_reference must be one of {MASK_REFERENCES}")
        if self.mask_reference == "receiver-mirror" and self.planning == "gop":
            raise ConfigError("receiver-mirror masks depend on K and cannot be GOP-planned")
        if self.stride < 1 or self.gop_size < 1:
            raise ConfigError("stride and gop_size must be positive")
        if self.cbr < 0:
            raise ConfigError("cbr must be non-negative")
        return self

    def tokenizer_config(self) -> TokenizerConfig:
        return TokenizerConfig(coeffs_per_block=self.coeffs_per_block,
                               bits_per_token=self.bits_per_token)

    def table(self) -> AcmTable:
        if self.acm_table:
            return AcmTable.from_file(self.acm_table, self.bler)
        return AcmTable(bler_target=self.bler)


_BOOL_TRUE = {"1", "true", "yes", "on"}


def coerce_fields(raw: dict) -> dict:
    """Convert string values (from a key=value file) to SimConfig field types."""
    fields = {f.name: f for f in dataclasses.fields(SimConfig)}
    out = {}
    for key, value in raw.items():
        name = key.strip().replace("-", "_")
        if name not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        default = fields[name].default
        if value is None or not isinstance(value, str):
            out[name] = value
        elif isinstance(default, bool):
            out[name] = value.strip().lower() in _BOOL_TRUE
        elif name in ("num_frames", "repetition", "stride", "gop_size", "seed",
                      "coeffs_per_block", "bits_per_token"):
            out[name] = int(value)
        elif name in ("cbr", "snr_db", "bler"):
            out[name] = float(value)
        else:
            out[name] = value
    return out


def load_config(path, **overrides) -> SimConfig:
    raw = coerce_fields(frameio.read_keyvalue(path))
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**raw).validate()


def load_input(cfg: SimConfig) -> list:
    src = cfg.input
    if src.startswith("synthetic:"):
        parts = src.split(":")
        kind = parts[1] if len(parts) > 1 else "moving"
        w, h, c = (int(x) for x in (parts[2] if len(parts) > 2 else "64x64x1").split("x"))
        n = cfg.num_frames or 32
        if kind == "moving":
            return frameio.synthetic_video(n, w, h, c, seed=cfg.seed)
        if kind == "static":
            return frameio.static_video(n, w, h, c, seed=cfg.seed)
        raise ConfigError(f"unknown synthetic source {kind!r}")
    frames = frameio.load_frames(src, cfg.sidecar)
    return frames[: cfg.num_frames] if cfg.num_frames else frames


@dataclass
class LinkResult:
    received: np.ndarray
    block_ok: bool
    symbols: int


def transmit(payload: np.ndarray, mcs, fec, snr_db: float, rng: np.random.Generator,
             budget: int = None) -> LinkResult:
    """FEC encode, modulate, AWGN, demodulate and FEC decode one packet."""
    coded = fec.encode(payload, mcs, budget)
    symbols = modulate(coded, mcs.modulation_order)
    if not fec.replaces_channel:
        symbols = awgn(symbols, snr_db, rng)
    hard = demodulate(symbols, mcs.modulation_order)[: coded.size]
    bits, ok = fec.decode(hard, mcs, payload.size, rng)
    if fec.replaces_channel:
        coded_len = math.ceil(payload.size / mcs.code_rate - 1e-9)
        used = math.ceil(coded_len / mcs.bits_per_symbol)
    else:
        used = symbols.size
    return LinkResult(bits, ok, used)


@dataclass
class _Tx:
    t: int
    tokens: TokenSequence
    mask: ChangeMask = None
    k_star: int = None


@dataclass
class RunArtifacts:
    """Everything a run produced beyond the report, for inspection and tests."""

    decoded: dict = field(default_factory=dict)
    tokens: dict = field(default_factory=dict)
    receiver_tokens: dict = field(default_factory=dict)
    desyncs: int = 0
    budget_violations: int = 0


def run(cfg: SimConfig, frames: list = None, artifacts: RunArtifacts = None) -> RunReport:
    """Simulate one stream through tokenize -> channel -> receiver -> decode."""
    cfg.validate()
    frames = frames if frames is not None else load_input(cfg)
    if cfg.num_frames:
        frames = frames[: cfg.num_frames]
    if not frames:
        raise ConfigError("input stream is empty")
    art = artifacts if artifacts is not None else RunArtifacts()
    tcfg = cfg.tokenizer_config()
    f0 = frames[0]
    width, height, channels = f0.width, f0.height, f0.channels
    length = tcfg.num_tokens(width, height, channels)
    if length > MAX_K:
        raise ConfigError(f"{length} tokens per frame exceed the 16-bit K field")
    b_val = tcfg.bits_per_token
    num_frames = len(frames)
    plan = key_indices(num_frames, cfg.stride, cfg.gop_size)
    m = f0.num_pixels

    table = cfg.table()
    mcs = select_mcs(ChannelEstimate(cfg.snr_db), table)
    k_t = allocate_symbols(cfg.cbr, m, num_frames, len(plan.key_indices)).symbols_per_key_frame
    budget = deliverable_bits(mcs, k_t)
    if cfg.charge_overhead:
        # byte padding must fit too; ceil8(x) <= B  <=>  x <= 8*floor(B/8)
        search_budget, overhead = 8 * (budget // 8), FRAMING_OVERHEAD_BITS
    else:
        search_budget, overhead = budget, 0
    fec = make_fec(cfg.fec, table.bler_target, cfg.repetition)
    rng = np.random.default_rng(cfg.seed)
    log.info("snr=%.2f dB -> MCS rate=%.3f %s; k_t=%d symbols, B_t=%d bits",
             cfg.snr_db, mcs.code_rate, mcs.modulation_name, k_t, budget)

    report = RunReport(pixels_per_frame=m, code_rate=mcs.code_rate,
                       modulation=mcs.modulation_name, symbols_per_key=k_t, budget_bits=budget)
    if overhead > search_budget:
        report.notes.append(f"budget {budget} bits cannot carry the {overhead}-bit framing; "
                            "key frames are not transmitted")
        log.warning(report.notes[-1])

    records = {}
    receiver = ReceiverState.fresh(length, b_val)
    for gop in gop_partition(num_frames, cfg.gop_size):
        keys = [t for t in gop if plan.is_key(t)]
        if not keys:
            continue
        receiver.reset()
        txs = [_Tx(t, tokenize(frames[t - 1], tcfg)) for t in keys]
        if cfg.mask_reference == "previous-key" or cfg.planning == "gop":
            ref = zero_state(length, b_val)
            for tx in txs:
                tx.mask = change_mask(tx.tokens, ref)
                tx.k_star = max_feasible_k(tx.mask, b_val, search_budget, overhead)
                ref = tx.tokens
        gop_k = plan_gop([tx.k_star for tx in txs]) if cfg.planning == "gop" else None
        mirror = zero_state(length, b_val)
        for tx in txs:
            if cfg.mask_reference == "receiver-mirror":
                tx.mask = change_mask(tx.tokens, mirror)
                tx.k_star = max_feasible_k(tx.mask, b_val, search_budget, overhead)
            k = gop_k if gop_k is not None else tx.k_star
            rec = FrameRecord(tx.t, True, k)
            records[tx.t] = rec
            prior = receiver.tokens.codes.copy()
            if k == INFEASIBLE or (k == 0 and not cfg.send_empty):
                rec.status = "fallback" if k == INFEASIBLE else "skipped"
                rec.crc_ok = False if k == INFEASIBLE else None
                rec.k = None if k == INFEASIBLE else 0
                if k == INFEASIBLE:
                    receiver.mark_lost()
            else:
                packet = pack(tx.tokens, tx.mask, k, b_val)
                rec.bits_net, rec.bits_gross = packet.net_bits, packet.gross_bits
                if cfg.charge_overhead and packet.payload.size > budget:
                    art.budget_violations += 1
                link = transmit(packet.payload, mcs, fec, cfg.snr_db, rng,
                                budget if cfg.charge_overhead else None)
                rec.symbols = link.symbols
                if link.block_ok:
                    _, status = receive_frame(receiver, link.received, b_val, allow_short_read=False)
                else:
                    status = receiver.mark_lost()
                rec.status = status.value
                rec.crc_ok = status != Status.FALLBACK
                expected = prior
                if status == Status.UPDATED:
                    expected = apply_update(prior, tx.mask.bits[:k],
                                            tx.tokens.codes[:k][tx.mask.bits[:k].astype(bool)])
                if not np.array_equal(expected, receiver.tokens.codes):
                    art.desyncs += 1
                    log.error("receiver state diverged at frame %d", tx.t)
            mirror = receiver_mirror_update(mirror, tx.mask, tx.tokens, rec.k or 0)
            decoded = reconstruct(receiver, tcfg, width=width, height=height, channels=channels)
            art.decoded[tx.t] = decoded
            art.tokens[tx.t] = tx.tokens
            art.receiver_tokens[tx.t] = receiver.tokens.codes.copy()
            rec.psnr = psnr(frames[tx.t - 1], decoded)

    for t in range(1, num_frames + 1):
        if plan.is_key(t):
            continue
        nb = neighbors(t, plan, cfg.boundary)
        if nb.needs_blend:
            out = interpolate(art.decoded[nb.before], art.decoded[nb.after], nb.alpha)
        else:
            out = interpolate(art.decoded[nb.before], art.decoded[nb.before], 0.0)
        art.decoded[t] = out
        records[t] = FrameRecord(t, False, psnr=psnr(frames[t - 1], out))
    report.frames = [records[t] for t in range(1, num_frames + 1)]

    if cfg.dump_dir:
        out_dir = Path(cfg.dump_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        ext = "ppm" if channels == 3 else "pgm"
        for t in range(1, num_frames + 1):
            frameio.write_netpbm(out_dir / f"frame_{t:05d}.{ext}", art.decoded[t])
    return report


def receiver_mirror_update(mirror: TokenSequence, mask: ChangeMask, tokens: TokenSequence,
                           k: int) -> TokenSequence:
    """Transmitter-side copy of the receiver state, assuming delivery."""
    flags = mask.bits[:k]
    codes = apply_update(mirror.codes, flags, tokens.codes[:k][flags.astype(bool)])
    return TokenSequence(codes, mirror.bits_per_token)


def _run_point(args):
    cfg, frames = args
    return run(cfg, frames)


def sweep(cfg: SimConfig, axis: str, values, frames: list = None, jobs: int = 1) -> list:
    """One independent run per value of ``snr`` or ``cbr``, all with the configured seed."""
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    field_name = {"snr": "snr_db", "cbr": "cbr"}.get(axis)
    if field_name is None:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    frames = frames if frames is not None else load_input(cfg)
    cfgs = [dataclasses.replace(cfg, **{field_name: float(v)}, dump_dir=None, output_csv=None)
            for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_point, [(c, frames) for c in cfgs]))
    return [run(c, frames) for c in cfgs]
