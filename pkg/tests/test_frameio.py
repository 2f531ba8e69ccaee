import pytest

from tokcast import frameio


@pytest.mark.parametrize("channels, suffix", [(1, ".pgm"), (3, ".ppm")])
def test_netpbm_roundtrip(tmp_path, make_frame, channels, suffix):
    frame = make_frame(24, 8, channels)
    path = tmp_path / f"a{suffix}"
    frameio.write_netpbm(path, frame)
    assert frameio.load_frames(path) == [frame]


def test_multi_image_file_with_comments(make_frame):
    a, b = make_frame(8, 8, 1), make_frame(8, 8, 1)
    data = b"P5\n# made by hand\n8 8\n255\n" + a.samples.tobytes() + frameio.encode_netpbm(b)
    assert frameio.parse_netpbm(data) == [a, b]


def test_netpbm_rejects_bad_input():
    with pytest.raises(ValueError):
        frameio.parse_netpbm(b"P2\n1 1\n255\n0")
    with pytest.raises(ValueError):
        frameio.parse_netpbm(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(ValueError):
        frameio.parse_netpbm(b"P5\n1 1\n65535\n\0\0")


def test_directory_in_name_order(tmp_path, make_frame):
    frames = [make_frame(8, 8, 3) for _ in range(3)]
    for i, f in reversed(list(enumerate(frames))):
        frameio.write_netpbm(tmp_path / f"f{i:03d}.ppm", f)
    assert frameio.load_frames(tmp_path) == frames


def test_raw_with_sidecar(tmp_path, make_frame):
    frames = [make_frame(16, 8, 3) for _ in range(4)]
    path = tmp_path / "clip.rgb"
    frameio.write_raw(path, frames)
    assert frameio.load_frames(path) == frames
    (tmp_path / "other.desc").write_text("# two frames only\nwidth=16\nheight=8\nchannels=3\nframes=2\n")
    assert frameio.load_frames(path, tmp_path / "other.desc") == frames[:2]


def test_raw_errors(tmp_path):
    path = tmp_path / "x.raw"
    path.write_bytes(bytes(10))
    with pytest.raises(FileNotFoundError):
        frameio.load_frames(path)
    (tmp_path / "x.desc").write_text("height=2\n")
    with pytest.raises(ValueError):
        frameio.load_frames(path)
    (tmp_path / "x.desc").write_text("width=2\nheight=2\nframes=3\n")
    with pytest.raises(ValueError):
        frameio.load_frames(path)


def test_keyvalue(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\ncbr = 4e-4\nsnr_db=6  # inline\nInput=a.ppm\n")
    assert frameio.read_keyvalue(p) == {"cbr": "4e-4", "snr_db": "6", "Input": "a.ppm"}


def test_synthetic_deterministic():
    a = frameio.synthetic_video(3, 128, 96, 3, seed=4)
    b = frameio.synthetic_video(3, 128, 96, 3, seed=4)
    assert a == b
    assert a[0].samples.shape == (96, 128, 3) and a[0] != a[2]
    s = frameio.static_video(3, 16, 16, 1)
    assert s[0] == s[2]
