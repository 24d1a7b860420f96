import csv

import numpy as np
import pytest

from ogerlrmc.cli import TRACE_HEADER, main, read_config, UsageError
from ogerlrmc.pgm import load_image, read_pgm, read_raw, save_image
from ogerlrmc.synthetic import low_rank


@pytest.fixture
def image(tmp_path):
    m = low_rank(16, 16, 2, seed=3)
    m = (m - m.min()) / (m.max() - m.min())
    path = tmp_path / "in.pgm"
    save_image(m, path)
    return path


def read_trace(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_complete_outputs(image, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["complete", str(image), "--output-dir", str(out), "--eta", "0.2", "--seed", "1"])
    assert rc == 0
    for name in ("recovered.pgm", "degraded.pgm", "error_component.pgm", "error_component.raw", "trace.csv"):
        assert (out / name).exists()
    last = capsys.readouterr().out.strip().splitlines()[-1]
    assert last.startswith("final_psnr= final_snr= iters=")

    raw = (out / "trace.csv").read_bytes()
    assert b"\r" not in raw
    rows = read_trace(out / "trace.csv")
    assert rows[0] == TRACE_HEADER
    body = rows[1:]
    assert len(body) == int(last.split("iters=")[1])
    assert all(r[3] == "" and r[4] == "" for r in body)
    re_col = [float(r[2]) for r in body]
    assert all(b <= a for a, b in zip(re_col[-10:], re_col[-9:]))
    assert re_col[-1] <= 1e-5

    err = read_raw(out / "error_component.raw")
    assert err.shape == (16, 16)


def test_complete_with_ground_truth(image, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["complete", str(image), "--output-dir", str(out), "--ground-truth", str(image), "--max-iter", "4"])
    assert rc == 0
    last = capsys.readouterr().out.strip().splitlines()[-1]
    psnr_text = last.split()[0].split("=")[1]
    assert float(psnr_text) > 0
    rows = read_trace(out / "trace.csv")[1:]
    assert len(rows) == 4 and all(r[3] and r[4] for r in rows)
    # Floats carry 17 significant digits.
    lag = rows[-1][1].lstrip("-").replace(".", "").split("e")[0].lstrip("0")
    assert len(lag) <= 17


def test_degraded_matches_input_on_observed(image, tmp_path):
    out = tmp_path / "out"
    mask_path = tmp_path / "mask.pgm"
    assert main(["maskgen", str(mask_path), "--rows", "16", "--cols", "16", "--eta", "0.3", "--seed", "2"]) == 0
    rc = main(["complete", str(image), "--output-dir", str(out), "--mask-image", str(mask_path), "--max-iter", "2"])
    assert rc == 0
    observed = read_pgm(mask_path) == 0
    assert np.array_equal(read_pgm(out / "degraded.pgm")[observed], read_pgm(image)[observed])
    assert not read_pgm(out / "degraded.pgm")[~observed].any()


def test_missing_input(tmp_path, capsys):
    rc = main(["complete", str(tmp_path / "nope.pgm"), "--output-dir", str(tmp_path / "o")])
    assert rc == 2
    assert "nope.pgm" in capsys.readouterr().err


def test_usage_errors(image, tmp_path):
    assert main(["complete", str(image)]) == 1
    assert main(["bogus"]) == 1
    assert main(["complete", str(image), "--output-dir", str(tmp_path), "--rho", "-1"]) == 1
    assert main(["decompose", str(image), "--k", "99", "--output-dir", str(tmp_path)]) == 1


def test_config_file_and_override(image, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep point\nrho = 0.6\nmax_iter = 3\neta=0.1\nseed = 4\nsurrogate = schatten_capped_p\np = 0.5\ntau = 2\n")
    out = tmp_path / "o"
    assert main(["complete", str(image), "--output-dir", str(out), "--config", str(cfg), "--max-iter", "2"]) == 0
    assert len(read_trace(out / "trace.csv")) == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(UsageError):
        read_config(bad)
    assert main(["complete", str(image), "--output-dir", str(out), "--config", str(bad)]) == 1


def test_decompose(tmp_path):
    m = np.random.default_rng(0).random((12, 10))
    path = tmp_path / "d.pgm"
    save_image(m, path)
    out = tmp_path / "dec"
    assert main(["decompose", str(path), "--k", "2", "5", "--output-dir", str(out)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == ["lowrank_k2.pgm", "lowrank_k5.pgm", "residual_k2.pgm", "residual_k5.pgm", "truncation_errors.csv"]
    rows = read_trace(out / "truncation_errors.csv")
    assert rows[0] == ["k", "residual_fro_sq", "sum_tail_sigma_sq"]
    for _, res, tail in rows[1:]:
        assert abs(float(res) - float(tail)) <= 1e-8 * max(1.0, float(tail))

    full = tmp_path / "full"
    assert main(["decompose", str(path), "--k", "10", "--output-dir", str(full)]) == 0
    assert float(read_trace(full / "truncation_errors.csv")[1][1]) <= 1e-12
    assert np.all(read_pgm(full / "residual_k10.pgm") == 128)


def test_maskgen(tmp_path):
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    assert main(["maskgen", str(a), "--rows", "8", "--cols", "8", "--eta", "0.0"]) == 0
    assert not read_pgm(a).any()
    assert main(["maskgen", str(a), "--rows", "8", "--cols", "8", "--eta", "0.4", "--seed", "9"]) == 0
    assert main(["maskgen", str(b), "--rows", "8", "--cols", "8", "--eta", "0.4", "--seed", "9"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert np.count_nonzero(read_pgm(a) == 255) == round(0.4 * 64)
    assert main(["maskgen", str(a), "--rows", "4", "--cols", "4", "--blocks", "0,0,2,2"]) == 0
    assert np.count_nonzero(read_pgm(a) == 255) == 4


def test_metrics(image, tmp_path, capsys):
    assert main(["metrics", str(image), str(image)]) == 0
    assert capsys.readouterr().out.strip() == "psnr=inf snr=inf"
    other = tmp_path / "zero.pgm"
    save_image(np.zeros((16, 16)), other)
    assert main(["metrics", str(image), str(other)]) == 0
    line = capsys.readouterr().out.strip()
    ref = load_image(image)
    assert float(line.split()[0].split("=")[1]) == pytest.approx(10 * np.log10(256 / np.sum(ref**2)), abs=1e-12)
