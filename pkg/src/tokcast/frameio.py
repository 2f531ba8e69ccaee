"""Frame ingestion and dumping: binary PGM/PPM, raw GRAY8/RGB24, synthetic clips.

A raw stream is described by a sidecar text file of ``key=value`` lines::

    width=256
    height=256
    channels=3
    frames=300

PGM/PPM files may hold several images back to back (as netpbm allows); a
directory is read as its ``*.pgm``/``*.ppm`` files in name order.
"""
from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np

from .tokenizer import Frame


def read_keyvalue(path) -> dict:
    """Parse a flat ``key=value`` file (``#`` comments, no sections)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_string("[top]\n" + Path(path).read_text())
    return dict(parser["top"])


def _next_token(data: bytes, pos: int) -> tuple:
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ValueError("truncated netpbm header")
    return data[start:pos], pos


def parse_netpbm(data: bytes) -> list:
    """Decode every P5/P6 image in ``data``."""
    frames = []
    pos = 0
    while pos < len(data) and data[pos:].strip():
        magic, pos = _next_token(data, pos)
        if magic not in (b"P5", b"P6"):
            raise ValueError(f"unsupported netpbm magic {magic!r}")
        w, pos = _next_token(data, pos)
        h, pos = _next_token(data, pos)
        maxval, pos = _next_token(data, pos)
        if int(maxval) > 255:
            raise ValueError("only 8-bit netpbm files are supported")
        pos += 1  # single whitespace before raster
        width, height = int(w), int(h)
        channels = 3 if magic == b"P6" else 1
        size = width * height * channels
        raster = data[pos:pos + size]
        if len(raster) != size:
            raise ValueError("truncated netpbm raster")
        frames.append(Frame.from_flat(raster, width, height, channels))
        pos += size
    return frames


def encode_netpbm(frame: Frame) -> bytes:
    magic = b"P6" if frame.channels == 3 else b"P5"
    header = b"%s\n%d %d\n255\n" % (magic, frame.width, frame.height)
    return header + np.ascontiguousarray(frame.samples, dtype=np.uint8).tobytes()


def write_netpbm(path, frame: Frame):
    Path(path).write_bytes(encode_netpbm(frame))


def read_raw(path, width: int, height: int, channels: int, frames: int = None) -> list:
    data = np.fromfile(path, dtype=np.uint8)
    size = width * height * channels
    count = data.size // size if frames is None else frames
    if data.size < count * size:
        raise ValueError(f"{path} holds {data.size // size} frames, {count} requested")
    return [Frame.from_flat(data[i * size:(i + 1) * size], width, height, channels)
            for i in range(count)]


def read_raw_with_sidecar(path, sidecar=None) -> list:
    path = Path(path)
    sidecar = Path(sidecar) if sidecar else _default_sidecar(path)
    desc = read_keyvalue(sidecar)
    try:
        width, height = int(desc["width"]), int(desc["height"])
    except KeyError as exc:
        raise ValueError(f"sidecar {sidecar} lacks {exc.args[0]}") from None
    channels = int(desc.get("channels", 1))
    frames = int(desc["frames"]) if "frames" in desc else None
    return read_raw(path, width, height, channels, frames)


def _default_sidecar(path: Path) -> Path:
    for cand in (path.with_name(path.name + ".desc"), path.with_suffix(".desc"),
                 path.with_suffix(".txt")):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no sidecar descriptor found next to {path}")


def write_raw(path, frames, sidecar: bool = True):
    path = Path(path)
    with open(path, "wb") as fh:
        for f in frames:
            fh.write(np.ascontiguousarray(f.samples, dtype=np.uint8).tobytes())
    if sidecar and frames:
        f0 = frames[0]
        path.with_name(path.name + ".desc").write_text(
            f"width={f0.width}\nheight={f0.height}\nchannels={f0.channels}\nframes={len(frames)}\n")


def load_frames(path, sidecar=None) -> list:
    """Load a stream from a netpbm file, a directory of them, or raw + sidecar."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() in (".pgm", ".ppm"))
        frames = []
        for p in files:
            frames.extend(parse_netpbm(p.read_bytes()))
        if not frames:
            raise ValueError(f"no PGM/PPM frames in {path}")
        return frames
    if path.suffix.lower() in (".pgm", ".ppm", ".pnm"):
        return parse_netpbm(path.read_bytes())
    return read_raw_with_sidecar(path, sidecar)


def synthetic_video(num_frames: int, width: int = 256, height: int = 256, channels: int = 3,
                    seed: int = 0, motion: float = 2.0) -> list:
    """Smooth textured background with drifting shapes; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    base = np.zeros((height, width, channels))
    for c in range(channels):
        fx, fy = rng.uniform(0.01, 0.05, 2)
        ph = rng.uniform(0, 2 * np.pi, 2)
        base[..., c] = 110 + 50 * np.sin(fx * xx + ph[0]) * np.cos(fy * yy + ph[1])
    base += rng.normal(0, 4, base.shape)
    blobs = []
    for _ in range(3):
        blobs.append((rng.uniform(0, width), rng.uniform(0, height), rng.uniform(15, 40),
                      rng.uniform(-1, 1, 2) * motion, rng.uniform(-90, 120, channels)))
    frames = []
    for t in range(num_frames):
        img = base.copy()
        for cx, cy, r, v, color in blobs:
            x0 = (cx + v[0] * t) % width
            y0 = (cy + v[1] * t) % height
            inside = (xx - x0) ** 2 + (yy - y0) ** 2 <= r * r
            img[inside] += color
        frames.append(Frame(np.clip(np.rint(img), 0, 255).astype(np.uint8)))
    return frames


def static_video(num_frames: int, width: int = 64, height: int = 64, channels: int = 1,
                 seed: int = 0) -> list:
    first = synthetic_video(1, width, height, channels, seed)[0]
    return [Frame(first.samples.copy()) for _ in range(num_frames)]
