import json

import jsonschema
import numpy as np
import pytest

import bilinscat.transfer
from bilinscat import cli, output
from bilinscat.config import ConfigError, parse_config

DELTA = {"window": [0, 0], "potential": [{"type": "delta", "position": 0, "strength": 2}]}
SINGULAR = {"window": [0, 0],
            "potential": [{"type": "delta", "position": 0, "strength": [[[0, 2]]]}]}
NILPOTENT = {"channels": 2, "window": [0, 0],
             "potential": [{"type": "delta", "position": 0, "strength": [[0, 1], [0, 0]]}],
             "energies": {"list": [0.5, 1, 3]}}
MIXED = {"channels": 2, "window": [0, 4],
         "potential": [{"type": "delta", "position": 0.5, "strength": [[[1, 1], 0], [2, [0, -1]]]},
                       {"type": "constant", "from": 1, "to": 2, "value": [[1, [0, 0.5]], [0, -1]]},
                       {"type": "analytic", "from": 2.5, "to": 3.5,
                        "expr": [["i*exp(-(z-3)^2)", "0.2*z"], ["0", "-1"]]}],
         "energies": {"linspace": {"start": 0.5, "stop": 4, "count": 8}}}


def evolve_doc(potential, steps=100, points=256):
    return {"window": [0, 10], "potential": potential,
            "evolve": {"length": 10, "points": points, "dt": 0.01, "steps": steps,
                       "right": {"center": 3, "width": 0.7, "momentum": 1.5},
                       "left": {"center": 3, "width": 0.7, "momentum": -1.5}}}


@pytest.fixture
def run(tmp_path):
    def go(command, doc, *extra, fmt="csv"):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(doc))
        out = tmp_path / f"out.{fmt}"
        code = cli.main([command, "--config", str(cfg), "--output", str(out),
                         "--format", fmt, "--quiet", *extra])
        return code, (out.read_text() if out.exists() else None)
    return go


def test_scatter_delta(run):
    code, text = run("scatter", DELTA, "--energy", "1", fmt="json")
    row = json.loads(text)
    assert code == 0
    assert row["t1_11_re"] == 0.5 and row["r1_11_re"] == 0.5 and row["flag"] == "ok"
    jsonschema.validate(row, output.scatter_document_schema(1))


def test_scatter_empty_potential(run):
    code, text = run("scatter", {"window": [0, 1]}, "--energy", "2", fmt="json")
    row = json.loads(text)
    assert code == 0 and abs(row["t1_11_re"] - 1) < 1e-12 and row["residual"] < 1e-12


def test_scatter_singularity_exit_code(run):
    code, text = run("scatter", SINGULAR, "--energy", "1")
    rows = output.parse_csv(text)
    assert code == 3
    assert rows[0]["flag"] == "singular" and rows[0]["t1_11_re"] is None


def test_scan_empty_linspace(run):
    code, text = run("scan", {"window": [0, 2],
                              "energies": {"linspace": {"start": 0.5, "stop": 2, "count": 4}}})
    rows = output.parse_csv(text)
    assert code == 0 and len(rows) == 4
    assert all(abs(r["t1_11_re"] - 1) < 1e-12 for r in rows)


def test_scan_delta_values(run):
    code, text = run("scan", dict(DELTA, energies={"list": [1, 4]}))
    assert [round(r["t1_11_re"], 12) for r in output.parse_csv(text)] == [0.5, 0.8]
    assert text.splitlines()[0].startswith("E,k0_re,k0_im,t1_11_re,t1_11_im,t2_11_re")
    assert text.splitlines()[0].endswith("residual,flag")


def test_scan_nilpotent_identity(run):
    code, text = run("scan", NILPOTENT)
    for r in output.parse_csv(text):
        t1 = np.array([[r["t1_11_re"], r["t1_12_re"]], [r["t1_21_re"], r["t1_22_re"]]])
        assert np.allclose(t1, np.eye(2), atol=1e-12)


def test_scan_determinism_and_workers(run, tmp_path):
    runs = [run("scan", MIXED), run("scan", MIXED), run("scan", MIXED, "--workers", "4")]
    assert [code for code, _ in runs] == [0, 0, 0]
    assert runs[0][1] == runs[1][1] == runs[2][1]
    assert len(output.parse_csv(runs[0][1])) == 8


def test_scan_csv_json_agree(run):
    csv_rows = output.parse_csv(run("scan", MIXED)[1])
    doc = json.loads(run("scan", MIXED, fmt="json")[1])
    jsonschema.validate(doc, output.scan_document_schema(2))
    assert doc["records"] == csv_rows


def test_scan_json_roundtrip_singular(run):
    doc = json.loads(run("scan", dict(SINGULAR, energies={"list": [0.5, 1, 2]}), fmt="json")[1])
    jsonschema.validate(doc, output.scan_document_schema(1))
    assert [r["flag"] for r in doc["records"]] == ["ok", "singular", "ok"]


def test_evolve_free(run):
    code, text = run("evolve", evolve_doc([]))
    rows = output.parse_csv(text)
    assert code == 0 and len(rows) == 101
    assert max(abs(r["norm_re"] - rows[0]["norm_re"]) for r in rows) < 1e-12
    assert "# max_norm_drift=" in text and "# delta_width=" in text


def test_evolve_zero_initial_field(run):
    doc = evolve_doc([], steps=5)
    doc["evolve"]["right"]["amplitude"] = 0
    doc["evolve"]["left"]["amplitude"] = [0, 0]
    rows = output.parse_csv(run("evolve", doc)[1])
    assert all(r["norm_re"] == r["norm_im"] == r["max_psi_r"] == 0 for r in rows)


def test_evolve_json_schema(run):
    pot = [{"type": "analytic", "from": 3, "to": 7, "expr": "i*exp(-(z-5)^2)"},
           {"type": "delta", "position": 8, "strength": [[[0.5, 1]]]}]
    code, text = run("evolve", evolve_doc(pot, steps=50), fmt="json")
    doc = json.loads(text)
    jsonschema.validate(doc, output.evolve_document_schema())
    assert doc["max_norm_drift"] < 1e-10 and doc["delta_width"] > 0


def test_output_path_from_config(tmp_path):
    out = tmp_path / "from_config.csv"
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(dict(DELTA, energies={"list": [1]}, output={"path": str(out)})))
    assert cli.main(["scan", "--config", str(cfg), "--quiet"]) == 0
    assert output.parse_csv(out.read_text())[0]["t1_11_re"] == 0.5


@pytest.mark.parametrize("doc", [
    {"window": [0, 1], "bogus": 1},
    {"potential": []},
    {"window": [0, 1], "potential": [{"type": "constant", "from": 0, "to": 2, "value": 1}]},
    {"window": [0, 1], "potential": [{"type": "analytic", "from": 0.2, "to": 0.5, "expr": "q"}]},
    {"window": [0, 1], "energies": {"list": [2, 1]}},
])
def test_config_errors_exit_2(run, doc):
    assert run("scan", doc)[0] == 2


def test_missing_sections_exit_2(run):
    assert run("scan", {"window": [0, 1]})[0] == 2
    assert run("evolve", {"window": [0, 1]})[0] == 2


def test_unreadable_config(tmp_path):
    assert cli.main(["scan", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["scan", "--config", str(bad)]) == 2


def test_parse_config_units_and_complex():
    cfg = parse_config({"units": {"hbar": 2, "mass": 1}, "window": [0, 1],
                        "potential": [{"type": "delta", "position": 0.5, "strength": [[[1, -1]]]}]})
    assert cfg.params.kinetic == 0.5
    assert cfg.potential.deltas[0].strength[0, 0] == 1 - 1j
    with pytest.raises(ConfigError):
        parse_config({"window": [0, 1], "channels": 0})


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_verify_passes(seed, capsys):
    assert cli.main(["verify", "--seed", str(seed)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1].endswith("suites passed")
    assert all(ln.endswith("PASS") for ln in lines[:-1])


def test_verify_forced_bug_fails(monkeypatch, capsys):
    real = bilinscat.transfer.reduce_block

    def broken(t, k0, sign):
        # drop the sector sign: the advanced reduction becomes the retarded one
        return real(t, k0, +1)

    monkeypatch.setattr(bilinscat.transfer, "reduce_block", broken)
    assert cli.main(["verify", "--seed", "0", "--quiet"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_numbers_use_17_significant_digits():
    assert output.fmt(0.1) == "0.10000000000000001"
    assert float(output.fmt(2 / 3)) == 2 / 3
