import json
import os

import pytest

from capcover.cli import main


@pytest.fixture
def ball2(tmp_path):
    p = tmp_path / "ball2.json"
    p.write_text(json.dumps({"type": "ball", "dim": 2, "radius": 1.0}))
    return str(p)


@pytest.fixture
def box2(tmp_path):
    p = tmp_path / "box2.json"
    p.write_text(json.dumps({"type": "box", "dim": 2,
                             "halfwidths": [1.0, 1.0]}))
    return str(p)


def test_approximate_json(tmp_path, ball2, capsys):
    out = str(tmp_path / "out")
    rc = main(["approximate", "--body", ball2, "--eps", "0.1",
               "--seed", "0", "--out", out, "--format", "json"])
    assert rc == 0
    payload = json.loads(open(os.path.join(out, "approximate.json")).read())
    assert payload["eps"] == 0.1
    assert payload["counts"]["total"] >= payload["counts"]["vertices"]
    assert payload["hausdorff_est"] <= 1.05 * 0.1


def test_approximate_csv(tmp_path, ball2):
    out = str(tmp_path / "out")
    rc = main(["approximate", "--body", ball2, "--eps", "0.1",
               "--out", out, "--format", "csv"])
    assert rc == 0
    lines = open(os.path.join(out, "approximate.csv")).read().splitlines()
    assert lines[0] == ("body,dim,eps,method,seed,vertices,total_faces,"
                        "hausdorff,runtime_ms")
    assert len(lines) == 2


def test_pack_histogram(tmp_path, box2):
    out = str(tmp_path / "out")
    rc = main(["pack", "--body", box2, "--eps", "0.05", "--dirs", "256",
               "--out", out])
    assert rc == 0
    payload = json.loads(open(os.path.join(out, "pack.json")).read())
    assert payload["entries"]
    assert all(e["accepted"] for e in payload["entries"])
    assert sum(payload["histogram"].values()) == len(payload["entries"])
    assert 0.0 < payload["coverage"] <= 1.0


def test_polar_check_records(tmp_path, box2):
    out = str(tmp_path / "out")
    rc = main(["polar-check", "--body", box2, "--eps", "0.01",
               "--dirs", "32", "--out", out])
    assert rc == 0
    payload = json.loads(open(os.path.join(out, "polar_check.json")).read())
    assert len(payload["records"]) == 32
    r = payload["records"][0]
    assert set(r) == {"direction", "cap_volume", "polar_cap_volume",
                      "normalized_product"}
    assert payload["band"]["ratio"] >= 1.0


def test_experiment_and_determinism(tmp_path, ball2):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "bodies": [{"id": "ball2",
                    "spec": {"type": "ball", "dim": 2, "radius": 1.0}}],
        "eps": [0.1, 0.05], "methods": ["bi"], "seeds": [0]}))
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    assert main(["experiment", "--grid", str(grid), "--out", out1,
                 "--format", "json,csv,svg"]) == 0
    assert main(["experiment", "--grid", str(grid), "--out", out2,
                 "--format", "json"]) == 0
    from capcover.metrics import strip_runtime
    a = strip_runtime(json.loads(open(os.path.join(out1, "records.json")).read()))
    b = strip_runtime(json.loads(open(os.path.join(out2, "records.json")).read()))
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert os.path.exists(os.path.join(out1, "records.svg"))
    assert os.path.exists(os.path.join(out1, "records.csv"))


def test_verify_ok(ball2, capsys):
    rc = main(["verify", "--body", ball2, "--eps", "0.1",
               "--halfspaces", "200", "--seed", "0"])
    assert rc == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] is True
    assert rep["fail_both"] == 0


def test_config_error_exit_codes(tmp_path, ball2, capsys):
    assert main(["experiment", "--grid", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["approximate", "--body", str(bad), "--eps", "0.1",
                 "--out", str(tmp_path)]) == 3
