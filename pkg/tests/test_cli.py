import json

import pytest

from fragmentia import clifford as cl
from fragmentia.circuit import circuit_from_bond_gates
from fragmentia.cli import main


def test_exact_wall_prob(capsys):
    assert main(["wall-prob", "--k", "2", "--exact"]) == 0
    out = capsys.readouterr().out
    assert "90/6859" in out and "9/6859" in out and "81/6859" in out


def test_missing_seed_is_usage_error(tmp_path):
    assert main(["wall-prob", "--k", "1", "--out", str(tmp_path / "a.csv")]) == 2


def test_exact_k3_rejected():
    assert main(["wall-prob", "--k", "3", "--exact"]) == 2


def test_unknown_config_field(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["scan", "--config", str(cfg), "--seed", "1"]) == 2


def test_resource_guard(tmp_path):
    rc = main(["sff", "--n", "14", "--seed", "1", "--realizations", "1", "--tmax", "2",
               "--out", str(tmp_path / "s.csv")])
    assert rc == 3


def test_wall_prob_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["wall-prob", "--k", "1", "--samples", "20000", "--seed", "7", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.csv.json").read_text())
    assert meta["seed"] == 7 and meta["command"] == "wall-prob"


def test_entropy_reproducible_with_config(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 6, "p": 0.0, "realizations": 10, "tmax": 20, "seed": 3}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["entropy", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["entropy", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].split(",")[:5] == ["t", "mean", "std", "min", "max"]
    assert len(lines) == 22
    assert json.loads((tmp_path / "a.csv.json").read_text())["path"] == "stabilizer"


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 6, "realizations": 4, "tmax": 5, "seed": 3}))
    out = tmp_path / "e.csv"
    assert main(["entropy", "--config", str(cfg), "--tmax", "8", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 10


def test_sff_small(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sff", "--n", "4", "--p", "1", "--realizations", "5", "--tmax", "10", "--seed", "2",
                 "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "t,K,dK,K_smeared,K_cue,dK_cue,ansatz"
    assert float(rows[1].split(",")[1]) == pytest.approx(256)


def test_scan_planted_wall(tmp_path):
    gates = [cl.representative(cl.SWAP)] * 9
    gates[4] = gates[5] = cl.representative(cl.CZ)
    c = circuit_from_bond_gates(10, gates)
    src = tmp_path / "c.json"
    src.write_text(c.to_json())
    out = tmp_path / "scan.json"
    assert main(["scan", "--circuit", str(src), "--kmax", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["unperturbed_walls"] >= 1
    assert any(w["pos"] == 5 and w["k"] == 1 for w in doc["walls"])
    assert doc["fragments"]["fragments"] == [[0, 5], [5, 9]]


def test_breach_exit_code(monkeypatch, tmp_path):
    import fragmentia.enumeration as en

    def fake(k, n, rng, **kw):
        return en.WallCensus(k, n, 0, float(en.exact_kwall_probability(k)))

    monkeypatch.setattr(en, "montecarlo_wall_prob", fake)
    assert main(["wall-prob", "--k", "1", "--samples", "100000", "--seed", "1",
                 "--out", str(tmp_path / "w.csv")]) == 1
