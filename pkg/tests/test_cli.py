import json
import subprocess
import sys

import pytest

from ptpolar.cli import bits_to_text, main, text_to_bits


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


CODE = ["--n", "5", "--k", "12", "--kcrc", "3", "--flavor", "rm-polar", "--pretransform", "7,0.5"]


def test_bit_text_roundtrip():
    import numpy as np

    bits = np.array([1, 0, 1, 1, 0, 1], dtype=np.uint8)
    assert bits_to_text(bits, "hex") == "2d"
    assert text_to_bits("2d", 6, "hex").tolist() == bits.tolist()
    assert text_to_bits("101101", 6, "bin").tolist() == bits.tolist()
    with pytest.raises(ValueError):
        text_to_bits("ff", 6, "hex")


def test_construct(capsys):
    code, out, _ = run(capsys, "construct", *CODE)
    data = json.loads(out)
    assert code == 0 and len(data["info_positions"]) == 15 and data["weight_threshold"] >= 1


@pytest.mark.parametrize("fmt,payload", [("hex", "a5c"), ("bin", "101001011100")])
def test_encode_decode_roundtrip(capsys, fmt, payload):
    _, word, _ = run(capsys, "encode", *CODE, "--format", fmt, payload)
    code, out, _ = run(capsys, "decode", *CODE, "--format", fmt, "--word", word.strip(), "--list", "4")
    data = json.loads(out)
    assert code == 0 and data["payload"] == payload and data["crc_pass"]


def test_decode_llrs(capsys):
    llrs = ",".join(["3.0"] * 32)
    code, out, _ = run(capsys, "decode", *CODE, "--llrs", llrs, "--adaptive", "--list", "8")
    data = json.loads(out)
    assert data["payload"] == "000" and data["list_size_used"] == 1


def test_spectrum(capsys):
    _, out, _ = run(capsys, "spectrum", "--n", "3", "--k", "4", "--method", "brute")
    data = json.loads(out)
    assert (data["d_min"], data["n_min"], data["method"]) == (4, 14, "exhaustive")
    _, out, _ = run(capsys, "spectrum", "--n", "3", "--k", "4", "--method", "probe", "--list-size", "16")
    assert json.loads(out)["n_min"] == 14


def test_bounds(capsys):
    _, out, _ = run(capsys, "bounds", "--n", "8", "--k", "128", "--ebno", "1.95")
    lines = out.strip().splitlines()
    assert lines[0] == "ebno_db,N,K,normal_approx_fer"
    assert float(lines[1].split(",")[3]) == pytest.approx(8.0858684e-4, rel=1e-6)


def test_simulate_flags_and_config(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "simulate", *CODE, "--list", "2", "--ebno", "1:2:1", "--max-frames", "200",
                     "--target-errors", "10", "--seed", "3", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[2] == "ebno_db,L,frames,frame_errors,fer,ml_lb_errors,ml_lb_fer,wall_seconds,seed"
    assert len(lines) == 5
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"code": {"n": 4, "K": 5}, "ebno_db": [2.0], "max_frames": 50}))
    code, csv_text, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0 and csv_text.splitlines()[1].startswith("2.0,32,")


def test_bad_config_reports_path(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"code": {"n": 4, "K": 5, "colour": 1}, "ebno_db": [2.0]}))
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and "code.colour" in err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ptpolar.cli", "construct", "--n", "2", "--k", "1"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["info_positions"] == [3]
