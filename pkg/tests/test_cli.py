import csv

import numpy as np
import pytest

from synth import detailed_image
from trainedfilter.cli import main
from trainedfilter.frame_io import Yuv422Frame, read_pgm, read_sequence, write_pgm, write_sequence
from trainedfilter.lsq_train import CoefficientTable, lut_file_size


def yuv_clip(tmp_path, name="clip.yuv", w=64, h=48, frames=2, seed=0):
    rng = np.random.default_rng(seed)
    seq = []
    for k in range(frames):
        y = detailed_image(seed * 10 + k, 64)[:h, :w]
        seq.append(Yuv422Frame(y, rng.integers(0, 256, (h, w // 2), dtype=np.uint8),
                               rng.integers(0, 256, (h, w // 2), dtype=np.uint8)))
    path = tmp_path / name
    write_sequence(seq, path)
    return path, seq


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_train_lut_size(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for s in range(3):
        write_pgm(detailed_image(s, 64), corpus / f"c{s}.pgm")
    lut = tmp_path / "deblur.tflt"
    assert main(["train", str(corpus), "--embodiment", "deblur", "--lut", str(lut)]) == 0
    assert lut.stat().st_size == 8 + 2**14 * 113 == lut_file_size(14)
    assert (CoefficientTable.load(lut).flags == 0).any()


def test_repair_with_identity_lut(tmp_path):
    src, _ = yuv_clip(tmp_path)
    lut = tmp_path / "id.tflt"
    CoefficientTable.identity(14).save(lut)
    out = tmp_path / "out.yuv"
    rc = main(["repair", str(src), "--width", "64", "--height", "48", "--lut", str(lut), "--out", str(out)])
    assert rc == 0
    assert out.read_bytes() == src.read_bytes()


def test_evaluate_identical(tmp_path, capsys):
    src, _ = yuv_clip(tmp_path)
    assert main(["evaluate", str(src), str(src), "--width", "64", "--height", "48"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows == [["name", "stage", "mse", "psnr", "ssim"], ["clip", "candidate", "0.00", "inf", "1.0000"]]


def test_evaluate_to_file(tmp_path):
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    write_pgm(np.full((8, 8), 100, np.uint8), a)
    write_pgm(np.full((8, 8), 120, np.uint8), b)
    out = tmp_path / "r.csv"
    assert main(["evaluate", str(a), str(b), "--stage", "enhanced", "--out", str(out)]) == 0
    assert read_csv(out)[1] == ["b", "enhanced", "400.00", "22.11", "0.9836"]


@pytest.mark.parametrize("kind", ["deblock", "deblur"])
def test_chroma_passthrough(tmp_path, kind):
    src, seq = yuv_clip(tmp_path)
    for cmd in ("degrade", "enhance"):
        out = tmp_path / f"{cmd}.yuv"
        assert main([cmd, str(src), "--width", "64", "--height", "48",
                     "--embodiment", kind, "--out", str(out)]) == 0
        frames = read_sequence(out, 64, 48)
        assert len(frames) == 2
        for got, orig in zip(frames, seq):
            assert np.array_equal(got.u, orig.u) and np.array_equal(got.v, orig.v)
            assert not np.array_equal(got.y, orig.y)


def test_upscale_changes_frame_geometry(tmp_path):
    src, seq = yuv_clip(tmp_path)
    small = tmp_path / "small.yuv"
    assert main(["degrade", str(src), "--width", "64", "--height", "48",
                 "--embodiment", "upscale", "--out", str(small)]) == 0
    assert small.stat().st_size == 2 * (2 * 32 * 24)
    big = tmp_path / "big.yuv"
    assert main(["enhance", str(small), "--width", "32", "--height", "24",
                 "--embodiment", "upscale", "--out", str(big)]) == 0
    frames = read_sequence(big, 64, 48)
    assert frames[0].u.shape == (48, 32)


def test_max_frames(tmp_path):
    src, _ = yuv_clip(tmp_path, frames=3)
    out = tmp_path / "o.yuv"
    assert main(["degrade", str(src), "--width", "64", "--height", "48",
                 "--max-frames", "1", "--out", str(out)]) == 0
    assert out.stat().st_size == 2 * 64 * 48


def test_usage_errors(tmp_path, capsys):
    src, _ = yuv_clip(tmp_path)
    out = tmp_path / "o.yuv"
    assert main(["degrade", str(src), "--out", str(out)]) == 1
    assert "--width" in capsys.readouterr().err
    assert main(["degrade", str(src), "--width", "64", "--height", "48",
                 "--quality", "0", "--out", str(out)]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["degrade", str(src), "--embodiment", "denoise"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    assert not out.exists()


def test_io_errors(tmp_path, capsys):
    out = tmp_path / "o.yuv"
    assert main(["degrade", str(tmp_path / "missing.yuv"), "--width", "4", "--height", "2",
                 "--out", str(out)]) == 2
    bad = tmp_path / "bad.yuv"
    bad.write_bytes(bytes(40))
    assert main(["degrade", str(bad), "--width", "4", "--height", "2", "--out", str(out)]) == 2
    assert "multiple" in capsys.readouterr().err
    lut = tmp_path / "junk.tflt"
    lut.write_bytes(b"nope")
    assert main(["repair", str(bad), "--width", "4", "--height", "5", "--lut", str(lut),
                 "--out", str(out)]) == 2
    assert not out.exists()


def test_repair_mode_mismatch(tmp_path, capsys):
    src, _ = yuv_clip(tmp_path)
    lut = tmp_path / "id13.tflt"
    CoefficientTable.identity(13).save(lut)
    rc = main(["repair", str(src), "--width", "64", "--height", "48", "--lut", str(lut),
               "--out", str(tmp_path / "o.yuv")])
    assert rc == 1
    assert "class" in capsys.readouterr().err


@pytest.mark.parametrize("kind", ["deblock", "deblur", "upscale"])
def test_experiment_equals_manual_chain(tmp_path, kind):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for s in range(2):
        write_pgm(detailed_image(s, 64), corpus / f"c{s}.pgm")
    test = tmp_path / "t.pgm"
    write_pgm(detailed_image(50, 64), test)
    exp = tmp_path / "exp"
    assert main(["experiment", "--embodiment", kind, "--corpus", str(corpus),
                 "--test", str(test), "--out", str(exp)]) == 0

    lut = tmp_path / "lut.tflt"
    deg, enh, rep = (tmp_path / f"{s}.pgm" for s in ("deg", "enh", "rep"))
    flags = ["--embodiment", kind]
    assert main(["train", str(corpus), "--lut", str(lut)] + flags) == 0
    assert main(["degrade", str(test), "--out", str(deg)] + flags) == 0
    assert main(["enhance", str(deg), "--out", str(enh)] + flags) == 0
    assert main(["repair", str(enh), "--lut", str(lut), "--out", str(rep)] + flags) == 0

    assert (exp / "lut.tflt").read_bytes() == lut.read_bytes()
    for stage, manual in (("degraded", deg), ("enhanced", enh), ("repaired", rep)):
        assert (exp / f"t.{stage}.pgm").read_bytes() == manual.read_bytes()

    rows = read_csv(exp / "results.csv")
    assert rows[0] == ["name", "stage", "mse", "psnr", "ssim"]
    assert [r[:2] for r in rows[1:]] == [["t", "degraded"], ["t", "enhanced"], ["t", "repaired"]]
    if kind == "upscale":
        assert rows[1][2:] == ["", "", ""]
    else:
        assert all(rows[1][2:])


def test_experiment_with_yuv(tmp_path):
    src, seq = yuv_clip(tmp_path, frames=2)
    corpus, _ = yuv_clip(tmp_path, name="corpus.yuv", seed=3)
    exp = tmp_path / "exp"
    assert main(["experiment", "--width", "64", "--height", "48", "--corpus", str(corpus),
                 "--test", str(src), "--out", str(exp)]) == 0
    rep = read_sequence(exp / "clip.repaired.yuv", 64, 48)
    assert np.array_equal(rep[1].v, seq[1].v)
    assert len(read_csv(exp / "results.csv")) == 4


def test_help_lists_stage_mapping(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "Blocky" in out and "Up scaling" in out
