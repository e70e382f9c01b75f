import json
import re

import pytest

from glcell.cli import EXIT_ERROR, EXIT_MAXITER, EXIT_OK, _format_json, main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_minimize_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run1"
    code, _, _ = run(["minimize", "--b", "0.25", "--N", "1", "--n", "48",
                      "--init", "trial", "--out", str(out)], capsys)
    assert code == EXIT_OK
    assert (out / "field.glc").exists()
    result = json.loads((out / "result.json").read_text())
    assert result["converged"]
    assert result["energy"]["total"] < 0.0
    assert set(result["energy"]) == {"kinetic", "potential", "offset", "total"}


def test_minimize_deterministic(tmp_path, capsys):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        code, _, _ = run(["minimize", "--b", "0.25", "--N", "1", "--n", "48",
                          "--init", "random", "--seed", "3", "--out", str(out)],
                         capsys)
        assert code == EXIT_OK
        outs.append((out / "result.json").read_text())
    assert outs[0] == outs[1]


def test_minimize_invalid_b(capsys):
    code, _, err = run(["minimize", "--b", "1.5", "--N", "1", "--n", "48"], capsys)
    assert code == EXIT_ERROR
    assert "b out of range" in err


def test_minimize_maxiter_exit_code(tmp_path, capsys):
    code, _, _ = run(["minimize", "--b", "0.25", "--N", "1", "--n", "48",
                      "--init", "random", "--max-iter", "2",
                      "--out", str(tmp_path)], capsys)
    assert code == EXIT_MAXITER


def test_trial_report(tmp_path, capsys):
    out = tmp_path / "t"
    code, stdout, _ = run(["trial", "--b", "0.04", "--N", "4", "--out", str(out)],
                          capsys)
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert set(report) >= {"g_trial", "predicted", "gap"}
    assert re.search(r"predicted = -?\d+\.\d{5}", stdout)


def test_trial_non_square_N(capsys):
    code, _, err = run(["trial", "--b", "0.1", "--N", "5", "--n", "160"], capsys)
    assert code == EXIT_ERROR
    assert "trial requires square N" in err


def test_missing_b_usage(capsys):
    code, _, err = run(["trial"], capsys)
    assert code == EXIT_ERROR
    assert "usage" in err.lower()


def test_vortices_on_trial_snapshot(tmp_path, capsys):
    out = tmp_path / "t"
    code, _, _ = run(["trial", "--b", "0.04", "--N", "4", "--out", str(out)], capsys)
    assert code == EXIT_OK
    vout = tmp_path / "v"
    code, _, _ = run(["vortices", str(out / "field.glc"), "--out", str(vout)],
                     capsys)
    assert code == EXIT_OK
    balls = json.loads((vout / "balls.json").read_text())
    assert len(balls) == 4
    assert all(b["degree"] == 1 for b in balls)
    lines = (vout / "squares.jsonl").read_text().splitlines()
    assert len(lines) == 4
    assert all(json.loads(line)["good"] for line in lines)
    assert (vout / "vorticity.glc").exists()


def test_vortices_corrupted_payload(tmp_path, capsys):
    out = tmp_path / "t"
    run(["trial", "--b", "0.25", "--N", "1", "--n", "48", "--out", str(out)],
        capsys)
    snap = out / "field.glc"
    snap.write_bytes(snap.read_bytes()[:-8])
    code, _, err = run(["vortices", str(snap), "--out", str(tmp_path / "v")], capsys)
    assert code == EXIT_ERROR
    assert "payload length mismatch" in err


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "sw"
    code, _, _ = run(["sweep", "--b", "0.2,0.25", "--N", "1",
                      "--out", str(out)], capsys)
    assert code == EXIT_OK
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "b,N,n,g_est,g_trial,d_lower,d_upper,pot,r0,zeta,flags"
    assert len(lines) == 3


def test_sweep_single_b_flagged(tmp_path, capsys):
    out = tmp_path / "sw1"
    code, _, _ = run(["sweep", "--b", "0.25", "--N", "1", "--out", str(out)],
                     capsys)
    assert code == EXIT_OK
    csv_text = (out / "sweep.csv").read_text()
    row = csv_text.splitlines()[1]
    assert "insufficient points" in row
    assert ",,," in row  # empty derivative columns


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"b": 0.25, "N": 1, "n": 48, "init": "trial"}))
    out = tmp_path / "r"
    code, _, _ = run(["minimize", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == EXIT_OK
    result = json.loads((out / "result.json").read_text())
    assert result["init"] == "trial"


def test_config_unknown_keys_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"b": 0.25, "bogus_key": 1}))
    code, _, err = run(["minimize", "--config", str(cfg)], capsys)
    assert code == EXIT_ERROR
    assert "unknown config keys" in err


def test_json_float_precision():
    x = 0.1 + 0.2
    text = _format_json({"v": x})
    assert format(x, ".17g") in text
    assert float(format(x, ".17g")) == x  # lossless round-trip
