import json
import os
import subprocess
import sys

import pytest

from ilwc.cli import run
from ilwc.container import EncodedContainer, flip_bit


def kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


@pytest.mark.parametrize("n", [2, 4, 8])
def test_encode_decode_roundtrip(tmp_path, n):
    src = tmp_path / "in.bin"
    src.write_bytes(os.urandom(5000) + b"\x00\xff")
    assert run(["encode", "--segment", str(n), "--input", str(src), "--output", str(tmp_path / "c.ilwc")]) == 0
    assert run(["decode", "--input", str(tmp_path / "c.ilwc"), "--output", str(tmp_path / "out.bin")]) == 0
    assert (tmp_path / "out.bin").read_bytes() == src.read_bytes()
    assert EncodedContainer.from_bytes((tmp_path / "c.ilwc").read_bytes()).segment_n == n


def corrupted_container(tmp_path):
    src = tmp_path / "in.bin"
    src.write_bytes(bytes(16))
    enc = tmp_path / "c.ilwc"
    assert run(["encode", "--segment", "8", "--input", str(src), "--output", str(enc)]) == 0
    c = EncodedContainer.from_bytes(enc.read_bytes())
    payload = c.payload
    # codeword 5 is 111111111; five flips bring it to weight 4
    for b in range(45, 50):
        payload = flip_bit(payload, b)
    enc.write_bytes(EncodedContainer(8, 16, payload).to_bytes())
    return enc


def test_strict_failure_exit_3(tmp_path, capsys):
    enc = corrupted_container(tmp_path)
    out = tmp_path / "out.bin"
    assert run(["decode", "--input", str(enc), "--output", str(out)]) == 3
    assert "codeword 5" in capsys.readouterr().err
    assert not out.exists()


def test_lenient_writes_sidecar(tmp_path):
    enc = corrupted_container(tmp_path)
    out = tmp_path / "out.bin"
    assert run(["decode", "--lenient", "--input", str(enc), "--output", str(out)]) == 0
    assert len(out.read_bytes()) == 16
    doc = json.loads((tmp_path / "out.bin.errors.json").read_text())
    assert doc["error_count"] == 1
    assert doc["errors"][0]["codeword_index"] == 5
    assert doc["errors"][0]["raw"] == "000001111"


def test_refuses_to_overwrite_input(tmp_path):
    src = tmp_path / "in.bin"
    src.write_bytes(b"abc")
    assert run(["encode", "--input", str(src), "--output", str(src)]) == 1
    assert src.read_bytes() == b"abc"


def test_io_and_usage_errors(tmp_path):
    assert run(["encode", "--input", str(tmp_path / "missing"), "--output", str(tmp_path / "o")]) == 2
    assert run(["encode", "--segment", "3", "--input", "a", "--output", "b"]) == 1
    assert run([]) == 1
    assert run(["bogus"]) == 1
    (tmp_path / "bad.ilwc").write_bytes(b"nope" + bytes(20))
    assert run(["decode", "--input", str(tmp_path / "bad.ilwc"), "--output", str(tmp_path / "o")]) == 2


def test_model_ispp(capsys):
    assert run(["model", "--ispp-dv", "3.5"]) == 0
    assert kv(capsys.readouterr().out)["n_steps"] == "16"
    assert run(["model", "--ispp-dv", "2.25"]) == 0
    assert kv(capsys.readouterr().out)["n_steps"] == "10"


def test_model_worst_case(capsys):
    assert run(["model", "--worst-case-dv-before", "3.5", "--worst-case-dv-after", "2.25"]) == 0
    out = kv(capsys.readouterr().out)
    assert abs(float(out["coupling_reduction"]) - 0.357142857142857) < 1e-9
    assert float(out["step_reduction"]) == 0.375


def test_model_fields_and_gains(capsys):
    assert run(["model", "--field-before", "1.8212", "--field-after", "1.2151", "--vth", "0",
                "--overhead", "0.5", "--p1", "0.75", "--pe", "0.1"]) == 0
    out = kv(capsys.readouterr().out)
    assert abs(float(out["rel_field_change"]) - 0.3328) < 1e-4
    assert float(out["read_disturb_field"]) == 5.0
    assert float(out["coding_gain"]) == 0.375
    assert float(out["energy_gain"]) == pytest.approx(0.0375)


def test_model_segment(capsys):
    assert run(["model", "--segment", "8"]) == 0
    out = kv(capsys.readouterr().out)
    assert (out["k"], out["m"], out["perfect"]) == ("9", "4", "true")
    assert float(out["expected_ones_uniform"]) == 163 / 256


def test_model_cell_error_needs_coefficients(tmp_path, capsys):
    assert run(["model", "--vth", "2.0", "--cell-error"]) == 1
    params = tmp_path / "p.txt"
    params.write_text("alpha1 = 0\nbeta1 = 1\nalpha2 = 0\nbeta2 = 0\n")
    capsys.readouterr()
    assert run(["model", "--params", str(params), "--vth", "2.0", "--cell-error"]) == 0
    assert float(kv(capsys.readouterr().out)["cell_error_rate"]) == 0.0


def test_model_needs_something():
    assert run(["model"]) == 1


def test_bad_params_exit_4(tmp_path):
    params = tmp_path / "p.txt"
    params.write_text("warp_factor = 9\n")
    assert run(["model", "--params", str(params), "--ispp-dv", "1"]) == 4
    assert run(["model", "--params", str(tmp_path / "missing"), "--ispp-dv", "1"]) == 4


def test_params_env(tmp_path, monkeypatch, capsys):
    params = tmp_path / "p.txt"
    params.write_text("delta_v_pp = 0.5\n")
    monkeypatch.setenv("ILWC_PARAMS", str(params))
    assert run(["model", "--ispp-dv", "3.5"]) == 0
    # 3.5 / (1.14 * 0.5) = 6.14
    assert kv(capsys.readouterr().out)["n_steps"] == "7"


def test_analyze_json_and_csv(tmp_path, capsys):
    data = tmp_path / "data"
    data.mkdir()
    (data / "a.pdf").write_bytes(os.urandom(3000))
    (data / "sub").mkdir()
    (data / "sub" / "b.mp3").write_bytes(os.urandom(2000))
    before = {p: p.read_bytes() for p in data.rglob("*") if p.is_file()}
    out = tmp_path / "r.json"
    assert run(["analyze", "--output", str(out), "--recursive", "--jobs", "1", str(data)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["files"]) == 2 and doc["configurations"] == ["uncoded", "2", "4", "8"]
    assert run(["analyze", "--format", "csv", "--segment", "4", "--ext", "pdf",
                "--output", str(tmp_path / "r.csv"), "--recursive", str(data)]) == 0
    rows = (tmp_path / "r.csv").read_text().strip().splitlines()
    assert len(rows) == 1 * 2 + 1
    assert (tmp_path / "r.hist_4.csv").exists()
    assert run(["analyze", "--output", "-", str(data / "a.pdf")]) == 0
    assert json.loads(capsys.readouterr().out)["files"][0]["size_bytes"] == 3000
    assert {p: p.read_bytes() for p in data.rglob("*") if p.is_file()} == before


def test_analyze_errors(tmp_path):
    assert run(["analyze", "--output", str(tmp_path / "r.json"), str(tmp_path / "none")]) == 2
    assert run(["analyze", "--jobs", "0", "--output", "x", str(tmp_path)]) == 1
    assert run(["analyze", "--segment", "2,5", "--output", "x", str(tmp_path)]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ilwc", "model", "--ispp-dv", "3.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "n_steps=16" in proc.stdout
