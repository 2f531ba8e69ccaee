import csv
import subprocess
import sys

from tokcast import frameio
from tokcast.cli import main
from tokcast.metrics import CSV_COLUMNS, SWEEP_COLUMNS


def _rows(path):
    return list(csv.reader(path.open()))


def test_run_writes_csv_and_figure(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["run", "--input", "synthetic:moving:32x32x1", "--frames", "6", "--stride", "2",
                 "--cbr", "0.05", "--csv", str(out)]) == 0
    rows = _rows(out)
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + 6 + 1
    png = out.with_suffix(".png")
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_run_no_figures(tmp_path):
    out = tmp_path / "run.csv"
    main(["run", "--input", "synthetic:static:16x16x1", "--frames", "2", "--csv", str(out),
          "--no-figures", "--fec", "bypass", "--no-overhead", "--skip-empty"])
    assert out.exists() and not out.with_suffix(".png").exists()


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("input = synthetic:moving:32x32x1\nnum_frames = 4\ncbr = 0.05\n")
    out = tmp_path / "r.csv"
    main(["run", "--config", str(cfg), "--frames", "2", "--csv", str(out), "--no-figures"])
    assert len(_rows(out)) == 1 + 2 + 1


def test_sweeps(tmp_path):
    for axis, values in (("snr", "-2,6"), ("cbr", "0.01,0.05")):
        out = tmp_path / f"{axis}.csv"
        main([f"sweep-{axis}", "--input", "synthetic:moving:32x32x1", "--frames", "3",
              "--cbr", "0.05", f"--values={values}", "--csv", str(out)])
        rows = _rows(out)
        assert tuple(rows[0]) == SWEEP_COLUMNS
        assert [r[1] for r in rows[1:]] == values.split(",")
        assert out.with_suffix(".png").exists()


def test_tokenize(tmp_path, make_frame):
    src = tmp_path / "in.pgm"
    frameio.write_netpbm(src, make_frame(16, 16, 1))
    tok, dec = tmp_path / "t.txt", tmp_path / "d.pgm"
    main(["tokenize", str(src), "-o", str(tok), "--decode", str(dec), "--coeffs", "4"])
    assert len(tok.read_text().split()) == 4 * 4
    assert frameio.load_frames(dec)[0].samples.shape == (16, 16, 1)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tokcast", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sweep-snr" in res.stdout
