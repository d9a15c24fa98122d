import csv
import json

import pytest

from mindisp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def points(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("x1,x2\n0.5,0.5\n")
    return p


def test_disp_exact_center_point(capsys, points):
    code, out, _ = run(capsys, "disp", "exact", "--points", str(points))
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == 0.5 and doc["mode"] == "exact"


def test_disp_estimate_is_below_exact(capsys, points):
    code, out, _ = run(capsys, "disp", "estimate", "--points", str(points), "--seed", "3")
    assert code == 0 and 0 < json.loads(out)["value"] <= 0.5


def test_disp_exact_dimension_cap(capsys, tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("0.1,0.2,0.3,0.4,0.5\n")
    code, _, err = run(capsys, "disp", "exact", "--points", str(p))
    assert code == 2 and "error" in err


def test_bad_point_file(capsys, tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("0.1,0.2\n0.3,1.5\n")
    code, _, err = run(capsys, "disp", "exact", "--points", str(p))
    assert code == 2 and "row 2" in err


def test_gen_then_check_hit_then_reduce(capsys, tmp_path):
    pts = tmp_path / "g.csv"
    assert run(capsys, "gen", "points", "--kind", "greedy-hitting", "--d", "16", "--k", "3",
               "--out", str(pts))[0] == 0
    code, out, _ = run(capsys, "boxes", "check-hit", "--points", str(pts), "--d", "16",
                       "--eps", "0.125")
    assert code == 0 and json.loads(out)["hits_all"] is True
    report = tmp_path / "rep.json"
    code, _, _ = run(capsys, "reduce", "--points", str(pts), "--eps", "0.125",
                     "--report", str(report))
    rep = json.loads(report.read_text())
    assert code == 0 and rep["certificate"]["verdict"] == "certified"
    assert rep["bounds"]["main_lower"] == pytest.approx(0.0444444444444, rel=1e-10)


def test_gen_points_deterministic(capsys):
    a = run(capsys, "gen", "points", "--kind", "uniform", "--d", "3", "--n", "4", "--seed", "9")
    b = run(capsys, "gen", "points", "--kind", "uniform", "--d", "3", "--n", "4", "--seed", "9")
    assert a == b and "seed=9" in a[1]


def test_boxes_gen(capsys):
    code, out, _ = run(capsys, "boxes", "gen", "--d", "4", "--k", "3")
    lines = [json.loads(s) for s in out.splitlines()]
    assert code == 0 and len(lines) == 12 and lines[0] == {"A": [0, 1], "j": 2, "k": 3, "d": 4}


def test_coverfree_certify(capsys, tmp_path):
    fam = tmp_path / "f.json"
    fam.write_text(json.dumps({"ground_size": 2, "sets": [[0, 1], [0], [1]]}))
    code, out, _ = run(capsys, "coverfree", "certify", "--family", str(fam), "--r", "1")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "refuted"
    assert doc["refutation"] == {"j": 1, "A": [0]}


def test_bounds_eval(capsys):
    code, out, _ = run(capsys, "bounds", "eval", "--d", "256", "--eps", "0.125")
    entries = {e["name"]: e for e in json.loads(out)}
    assert entries["main"]["value"] == pytest.approx(0.0888888888888889, rel=1e-12)
    assert entries["bc"]["value"] is None


def test_bounds_eval_out_of_range(capsys):
    assert run(capsys, "bounds", "eval", "--d", "1", "--eps", "0.125")[0] == 2


def test_lower_bound_config_error(capsys, tmp_path):
    code, _, err = run(capsys, "experiment", "lower-bound", "--d-list", "4", "--k-list", "4",
                       "--out-dir", str(tmp_path))
    assert code == 2 and "2**(k-2) < d" in err
    assert not list(tmp_path.iterdir())


def test_lower_bound_empty_list(capsys, tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("d_list =\n")
    code, _, _ = run(capsys, "experiment", "lower-bound", "--config", str(cfg),
                     "--out-dir", str(tmp_path / "o"))
    assert code == 2


def test_lower_bound_sweep_rows(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "lower-bound", "--d-list", "16", "--k-list", "2,3",
                       "--seeds", "0,1", "--out-dir", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "lower_bound_sweep.csv").open()))
    assert len(rows) == 4 and {r["verdict"] for r in rows} == {"certified"}
    assert all(r["exceeds_main"] == "True" for r in rows)
    assert json.loads(out)["internal_errors"] == 0


def test_config_file_and_flag_override(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# sweep\nd_list = 8\nk_list = 2\nseeds = 0, 1, 2\n")
    monkeypatch.setenv("MINDISP_OUTPUT_DIR", str(tmp_path / "env"))
    code, _, _ = run(capsys, "experiment", "lower-bound", "--config", str(cfg), "--seeds", "5")
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "env" / "lower_bound_sweep.csv").open()))
    assert [r["seed"] for r in rows] == ["5"]


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("colour = blue\n")
    assert run(capsys, "experiment", "claims", "--config", str(cfg))[0] == 2


def test_upper_bound_n_zero(capsys, tmp_path):
    code, _, _ = run(capsys, "experiment", "upper-bound", "--d-list", "2", "--eps-list", "0.125",
                     "--n-list", "0", "--seeds", "0,1", "--out-dir", str(tmp_path))
    rows = list(csv.DictReader((tmp_path / "upper_bound_sweep.csv").open()))
    assert code == 0 and rows[0]["fraction"] == "0.0" and rows[0]["max_estimate"] == "1.0"


def test_reports_identical_apart_from_timestamp(capsys, tmp_path):
    args = ["experiment", "lower-bound", "--d-list", "8", "--k-list", "2", "--seeds", "0"]
    run(capsys, *args, "--out-dir", str(tmp_path / "a"))
    run(capsys, *args, "--out-dir", str(tmp_path / "b"))
    for name in ("lower_bound_sweep.csv", "lower_bound_sweep.json"):
        a = (tmp_path / "a" / name).read_text().splitlines()
        b = (tmp_path / "b" / name).read_text().splitlines()
        def strip(lines):
            return [s for s in lines if "generated_at" not in s]
        assert strip(a) == strip(b)


def test_claims_suite_small_config(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "claims", "--hitting-instances", "20",
                       "--aa-families", "20", "--log-scan-max", "1000",
                       "--out-dir", str(tmp_path))
    assert code == 0 and out.count("PASS") == 5


def test_claims_suite_fault_injection_fails(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "claims", "--hitting-instances", "20",
                       "--aa-families", "5", "--log-scan-max", "1000", "--fault-injection",
                       "--out-dir", str(tmp_path))
    assert code == 1 and "FAIL  hitting_cover_free" in out


def test_help_lists_formulas(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "c = 1/1920" in out and "log2(d) / (8 eps)" in out
