import json
import subprocess
import sys

import numpy as np
import pytest

from degrobin import cli


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def read_csv(path):
    body = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return np.loadtxt(body[1:], delimiter=",", ndmin=2)


def run(*argv):
    return cli.run([str(a) for a in argv])


def test_classify_json(capsys):
    assert run("classify", "--N", 3, "--theta", 0.5, "--q", 1.4, "--format", "json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["regime"] == "Energy"
    assert doc["report"]["q_double_star"] == 21
    assert doc["report"]["exact"]["q_lower_energy"] == "4/3"
    assert doc["config"]["theta"] == "0.5"


def test_classify_from_config(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"N": 3, "theta": 0.5, "q": 1.3})
    assert run("classify", "--config", cfg) == 0
    out = capsys.readouterr().out
    assert out.startswith("# ")
    assert "regime,NonEnergy" in out


def test_classify_missing_q():
    assert run("classify", "--theta", 0.5) == 2


def test_oracle_nonexistence(tmp_path, capsys):
    cfg = write(tmp_path, "o.json", {"problem": {"theta": 1, "A": 2, "gamma": 1}})
    assert run("oracle", "--config", cfg) == 4
    assert "no bounded radial solution" in capsys.readouterr().err


def test_oracle_profile(tmp_path):
    cfg = write(tmp_path, "o.json", {"problem": {"theta": 1, "A": 1, "gamma": 1}, "samples": 3})
    out = tmp_path / "o.tsv"
    assert run("oracle", "--config", cfg, "--out", out, "--format", "tsv") == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1].startswith("# config: {")
    data = np.loadtxt(out, comments="#")
    assert data.shape == (3, 3)
    assert data[0, 1] == pytest.approx(2.297442541, abs=1e-6)
    assert data[-1, 1] == pytest.approx(1.0, abs=1e-9)


def test_solve_zero_source(tmp_path):
    cfg = write(tmp_path, "s.json", {"problem": {"theta": 0.5, "A": 0, "gamma": 0}})
    out = tmp_path / "s.csv"
    assert run("solve", "--config", cfg, "--mesh", 64, "--out", out) == 0
    data = read_csv(out)
    assert data.shape == (65, 4)
    assert np.all(data[:, 1] == 0.0)


def test_solve_json_header(tmp_path):
    cfg = write(tmp_path, "s.json", {"problem": {"theta": 0.5, "source": {"type": "power", "A": 1, "gamma": 0}}})
    out = tmp_path / "s.json.out"
    assert run("solve", "--config", cfg, "--mesh", 32, "--tol", 1e-9, "--format", "json", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["problem"]["M"] == 32
    assert doc["config"]["problem"]["tol"] == 1e-9
    assert doc["meta"]["converged"] is True
    assert len(doc["data"]) == 33


def test_solve_tabulated(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {"problem": {"theta": 0.5, "M": 32, "source": {"type": "tabulated", "r": [0, 1], "f": [1, 1]}}})
    assert run("solve", "--config", cfg) == 0


def test_solve_nonexistence(tmp_path):
    cfg = write(tmp_path, "s.json", {"problem": {"theta": 1, "A": 3, "gamma": 1, "M": 64, "trunc": 10}})
    out = tmp_path / "s.csv"
    assert run("solve", "--config", cfg, "--out", out) == 4
    assert out.exists()


def test_solve_nonconvergence(tmp_path):
    cfg = write(tmp_path, "s.json", {"problem": {"theta": 1, "A": 4, "gamma": 1, "M": 64, "max_iter": 5}})
    assert run("solve", "--config", cfg, "--trunc", 1e6) == 3


@pytest.mark.parametrize(
    "doc",
    [
        {"problem": {"bogus": 1}},
        {"problem": {"theta": 2}},
        {"problem": {"source": {"type": "gaussian"}}},
        {"problem": {"M": 4}},
    ],
)
def test_invalid_config(tmp_path, doc):
    assert run("solve", "--config", write(tmp_path, "bad.json", doc)) == 2


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run("solve", "--config", p) == 2


def test_io_errors(tmp_path):
    assert run("solve", "--config", tmp_path / "missing.json") == 5
    cfg = write(tmp_path, "s.json", {"problem": {"A": 0, "M": 16}})
    assert run("solve", "--config", cfg, "--out", tmp_path / "no" / "x.csv") == 5


def test_sweep_deterministic(tmp_path):
    doc = {"problem": {"theta": 1, "A": 1, "gamma": 1, "M": 128}, "sweep": {"parameter": "trunc", "values": [10, 100, 1000]}}
    cfg = write(tmp_path, "w.json", doc)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("sweep", "--config", cfg, "--out", a, "--jobs", 2) == 0
    assert run("sweep", "--config", cfg, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    data = read_csv(a)
    assert data.shape == (3, 7)
    assert np.ptp(data[:, 1]) < 1e-8


def test_sweep_amplitude_nonexistence(tmp_path):
    doc = {"problem": {"theta": 1, "gamma": 1, "M": 64, "trunc": 10}, "sweep": {"parameter": "A", "values": [1, 2]}}
    assert run("sweep", "--config", write(tmp_path, "w.json", doc), "--out", tmp_path / "w.csv") == 4


def test_sweep_bad_axis(tmp_path):
    doc = {"problem": {}, "sweep": {"parameter": "colour", "values": [1]}}
    assert run("sweep", "--config", write(tmp_path, "w.json", doc)) == 2
    assert run("sweep", "--config", write(tmp_path, "v.json", {"problem": {}})) == 2


def test_verify_byte_identical(tmp_path):
    doc = {
        "verify": {
            "energy": {"A": [1.0, 100.0], "M": 512},
            "w1s": {"A": [1.0, 10.0], "meshes": [128]},
            "fuzz": {"samples": 1000},
        }
    }
    cfg = write(tmp_path, "v.json", doc)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("verify", "--config", cfg, "--seed", 3, "--out", a) == 0
    assert run("verify", "--config", cfg, "--seed", 3, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "pointwise_inequality_violations,0" in text
    assert '"seed": 3' in text


def test_help_lists_columns():
    out = subprocess.run([sys.executable, "-m", "degrobin.cli", "--help"], capture_output=True, text=True, check=True).stdout
    for col in ("weak_residual", "flux", "q_double_star", "exit codes"):
        assert col in out


def test_schema_covers_outputs():
    schema = cli._schema()
    assert set(schema["commands"]) == set(cli.COMMANDS)
    assert set(schema["exit_codes"]) == {"0", "2", "3", "4", "5"}
