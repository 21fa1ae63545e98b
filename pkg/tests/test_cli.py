import json
import subprocess
import sys

import pytest

from sublevel import __version__
from sublevel.cli import (
    STATEMENTS,
    ConfigError,
    main,
    parse_grid,
    parse_points,
    read_config_file,
    read_env,
    resolve_config,
)
from sublevel.experiments.report import rows_from_csv


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_has_twelve_stable_entries(capsys):
    code, first, _ = run(["list"], capsys)
    _, second, _ = run(["list"], capsys)
    lines = first.strip().splitlines()
    assert code == 0 and first == second
    assert len(lines) == 12
    assert [ln.split("\t")[0] for ln in lines] == list(STATEMENTS)
    thm2 = dict(ln.split("\t") for ln in lines)["thm2"]
    assert "Theorem 2" in thm2


def test_catalog_lists_members(capsys):
    code, out, _ = run(["catalog"], capsys)
    assert code == 0
    assert "radial_extremal:n=2\tdim=2" in out.splitlines()


def test_run_vdcorput_passes(tmp_path, capsys):
    code, out, _ = run(["run", "vdcorput", "--set", "k=2", "--out", str(tmp_path)], capsys)
    assert code == 0 and "PASS" in out
    rep = json.loads((tmp_path / "vdcorput_seed0_report.json").read_text())
    assert rep["pass"] is True
    assert abs(rep["fit"]["exponent"] - 0.5) <= 0.03


def test_outputs_round_trip(tmp_path, capsys):
    run(["run", "carbery", "--seed", "4", "--out", str(tmp_path)], capsys)
    rows = rows_from_csv((tmp_path / "carbery_seed4_rows.csv").read_text())
    rep = json.loads((tmp_path / "carbery_seed4_report.json").read_text())
    man = json.loads((tmp_path / "carbery_seed4_manifest.json").read_text())
    assert len(rows) == len(rep["rows"]) == 17
    assert [r["lhs"] for r in rows] == [r["lhs"] for r in rep["rows"]]
    assert man["version"] == __version__
    assert man["config"]["seed"] == 4 and man["config"]["resolution"] == 256
    assert man["wall_time_s"] >= 0
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "carbery_seed4_manifest.json",
        "carbery_seed4_report.json",
        "carbery_seed4_rows.csv",
    ]


def test_unknown_statement_exits_2(tmp_path, capsys):
    code, _, err = run(["run", "thm9", "--out", str(tmp_path)], capsys)
    assert code == 2 and "unknown statement" in err


def test_missing_statement_exits_2(capsys):
    code, _, err = run(["run"], capsys)
    assert code == 2 and "no statement" in err


def test_config_diagnostic_is_line_anchored(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# demo\nstatement = vdcorput\nk = two\n")
    code, _, err = run(["run", "--config", str(cfg)], capsys)
    assert code == 2
    assert f"{cfg}:3:" in err


def test_config_line_without_equals(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("statement vdcorput\n")
    with pytest.raises(ConfigError, match=":1:"):
        read_config_file(cfg)


def test_verification_failure_exits_1(tmp_path, capsys):
    code, _, err = run(["run", "vdcorput", "--set", "grid=1e-3", "--out", str(tmp_path)], capsys)
    assert code == 1
    assert "first failure: check exponent" in err


def test_precondition_failure_exits_2(tmp_path, capsys):
    code, _, err = run(["run", "prop2", "--set", "function=skew", "--out", str(tmp_path)], capsys)
    assert code == 2 and "laplacian" in err


def test_precedence_cli_over_env_over_file(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("statement = vdcorput\nseed = 1\nk = 3\nresolution = 1024\n")
    env = read_env({"SUBLEVEL_SEED": "2", "SUBLEVEL_K": "4", "HOME": "/x"})
    resolved = resolve_config(read_config_file(cfg), env, {"seed": 7, "resolution": None})
    assert resolved["seed"] == 7
    assert resolved["k"] == 4
    assert resolved["resolution"] == 1024
    assert resolved["grid"] == "1e-5:1e-2"


def test_env_is_read_by_run(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SUBLEVEL_SEED", "9")
    code, out, _ = run(["run", "vdcorput", "--out", str(tmp_path)], capsys)
    assert code == 0 and (tmp_path / "vdcorput_seed9_rows.csv").exists()


def test_bad_env_value_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SUBLEVEL_PATHS", "many")
    code, _, err = run(["run", "vdcorput", "--out", str(tmp_path)], capsys)
    assert code == 2 and "SUBLEVEL_PATHS" in err


def test_grid_and_point_parsing():
    assert parse_grid("1e-3:1e-1:3").tolist() == pytest.approx([1e-3, 1e-2, 1e-1])
    assert len(parse_grid("1e-3:1e-1")) == 17
    assert parse_grid("0.25, 0.5").tolist() == [0.25, 0.5]
    assert parse_points("0,0; 0.3,0.2") == [(0.0, 0.0), (0.3, 0.2)]
    for bad in ("", "1:0", "1e-3:1e-1:0", "a,b"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_rows_csv_byte_identical_across_runs_and_workers(tmp_path, capsys):
    args = ["run", "champagne", "--paths", "300", "--resolution", "128", "--set", "bubbles=0,10,20"]
    run(args + ["--out", str(tmp_path / "a")], capsys)
    run(args + ["--out", str(tmp_path / "b"), "--set", "workers=4"], capsys)
    a = (tmp_path / "a" / "champagne_seed0_rows.csv").read_bytes()
    b = (tmp_path / "b" / "champagne_seed0_rows.csv").read_bytes()
    assert a == b
    assert (tmp_path / "a" / "champagne_seed0_report.json").read_bytes() == (
        tmp_path / "b" / "champagne_seed0_report.json"
    ).read_bytes()


def test_help_documents_columns_and_env():
    out = subprocess.run([sys.executable, "-m", "sublevel", "run", "--help"], capture_output=True, text=True, check=True).stdout
    assert "label, parameter, lhs, rhs, ratio, pass" in out
    assert "SUBLEVEL_" in out
