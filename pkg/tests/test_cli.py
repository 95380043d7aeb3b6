"""Command-line interface: argument handling, config files, output
formats, exit codes, and agreement with the library calls it wraps."""

import json
import math

import pytest

from covertcomm import cli
from covertcomm.analytic import dep, rtp
from covertcomm.montecarlo import RngSpec
from covertcomm.optimizer import max_users, optimal_power
from covertcomm.params import SystemParams, power_from_snr_db
from covertcomm.scheduler import GREEDY_BELIEF, GridConfig, run_episode


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_file_and_overrides(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nq = 8\nL=2\nm = 2\n\nk = 2\n")
    cfg = cli.load_config(str(conf), ["omega_u=3.5", "k=4"])
    params = cfg.system_params()
    assert params.q == 8 and params.L == 2 and params.m == 2
    assert params.k == 4          # --set wins over the file
    assert params.omega_u == 3.5


def test_config_rejects_unknown_and_malformed(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("qq = 8\n")
    with pytest.raises(ValueError, match="unknown config key"):
        cli.load_config(str(conf), [])
    conf.write_text("just words\n")
    with pytest.raises(ValueError, match="expected 'key = value'"):
        cli.load_config(str(conf), [])
    with pytest.raises(ValueError, match="unknown config key"):
        cli.load_config(None, ["nope=1"])
    with pytest.raises(ValueError):
        cli.load_config(None, ["q=notanint"])


def test_grid_parsers():
    assert cli._parse_float_grid("0:10:5") == [0.0, 2.5, 5.0, 7.5, 10.0]
    assert cli._parse_float_grid("1.5,2,-3") == [1.5, 2.0, -3.0]
    assert cli._parse_int_list("2:5") == [2, 3, 4, 5]
    assert cli._parse_int_list("4,8,16") == [4, 8, 16]
    assert cli._parse_float_grid("3:9:1") == [3.0]   # single-point grid
    with pytest.raises(ValueError):
        cli._parse_float_grid("0:10:0")
    with pytest.raises(ValueError):
        cli._parse_int_list("5:2")


def test_dep_csv_matches_library(capsys):
    code, out, err = _run(
        capsys, "dep", "--snr-db", "37", "--k-list", "4",
        "--trials", "2000", "--seed", "12345",
    )
    assert code == 0 and err == ""
    lines = out.strip().splitlines()
    assert lines[0] == "snr_db,k,dep_analytic,dep_mc_mean,dep_mc_se"
    snr, k, analytic, mc_mean, mc_se = lines[1].split(",")
    params = SystemParams().with_(k=4, p_b=power_from_snr_db(37.0))
    assert float(analytic) == pytest.approx(dep(params), rel=1e-9)
    assert abs(float(mc_mean) - float(analytic)) <= 4 * float(mc_se)


def test_dep_output_deterministic(capsys):
    args = ("dep", "--snr-db", "30:44:3", "--k-list", "4,8",
            "--trials", "500", "--seed", "7")
    _, first, _ = _run(capsys, *args)
    _, second, _ = _run(capsys, *args)
    assert first == second
    assert len(first.strip().splitlines()) == 1 + 3 * 2


def test_dep_column_nonincreasing_in_snr(capsys):
    _, out, _ = _run(capsys, "dep", "--snr-db", "37:44:8",
                     "--k-list", "4", "--trials", "200")
    col = [float(line.split(",")[2]) for line in out.strip().splitlines()[1:]]
    assert all(a >= b for a, b in zip(col, col[1:]))


def test_rtp_csv_matches_library(capsys):
    code, out, _ = _run(
        capsys, "rtp", "--snr-db", "0,3", "--k-list", "4",
        "--trials", "2000",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "snr_db,k,rtp_analytic,rtp_mc_mean,rtp_mc_se"
    row = lines[1].split(",")
    params = SystemParams().with_(k=4, p_b=power_from_snr_db(0.0))
    assert float(row[2]) == pytest.approx(rtp(params), rel=1e-9)


def test_json_format_and_out_file(tmp_path, capsys):
    target = tmp_path / "dep.json"
    code, out, _ = _run(
        capsys, "dep", "--snr-db", "37", "--k-list", "4",
        "--trials", "500", "--format", "json", "--out", str(target),
    )
    assert code == 0 and out == ""
    rows = json.loads(target.read_text())
    assert len(rows) == 1
    assert set(rows[0]) == {
        "snr_db", "k", "dep_analytic", "dep_mc_mean", "dep_mc_se"
    }


def test_power_bounds_matches_library(capsys):
    code, out, _ = _run(
        capsys, "power-bounds", "--k-range", "2:4", "--p-max", "1e5",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,p_low,p_up,feasible,p_star,rate_star"
    assert len(lines) == 4
    row = lines[1].split(",")
    res = optimal_power(SystemParams().with_(k=2), p_max=1e5)
    assert float(row[1]) == pytest.approx(res.bounds.p_low, rel=1e-9)
    assert float(row[2]) == pytest.approx(res.bounds.p_up, rel=1e-9)
    assert row[3] == "true"


def test_power_bounds_infeasible_rows_flagged(capsys):
    code, out, _ = _run(
        capsys, "power-bounds", "--k-range", "2:2",
        "--set", "eps_u=0.0001", "--p-max", "1e5",
    )
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    assert row[3] == "false"
    assert row[4] == "nan" and row[5] == "nan"


def test_power_bounds_columns_nondecreasing_in_k(capsys):
    code, out, _ = _run(
        capsys, "power-bounds", "--k-range", "2:8", "--p-max", "1e5",
    )
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    lows = [float(r[1]) for r in rows]
    ups = [float(r[2]) for r in rows]
    assert all(a <= b for a, b in zip(lows, lows[1:]))
    assert all(a <= b for a, b in zip(ups, ups[1:]))


def test_capacity_matches_library(capsys):
    code, out, _ = _run(
        capsys, "capacity", "--snr-db", "10,14", "--eps-u-list", "0.1",
        "--set", "q=8", "--set", "L=2", "--set", "m=2",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "snr_db,eps_u,k_star"
    small = SystemParams(m=2, k=1, q=8, L=2)
    for line, snr in zip(lines[1:], (10.0, 14.0)):
        want = max_users(small, p_max=power_from_snr_db(snr)).k_star
        assert int(line.split(",")[2]) == want


def test_schedule_stats_and_trace(tmp_path, capsys):
    trace = tmp_path / "grid.csv"
    stats_json = tmp_path / "stats.json"
    code, out, _ = _run(
        capsys, "schedule", "--episodes", "2", "--seed", "99",
        "--set", "q=8", "--set", "p=40", "--set", "L=4",
        "--set", "m=1", "--set", "users_per_bs=2",
        "--set", "jammed_slots=1,5",
        "--trace", str(trace), "--stats-json", str(stats_json),
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == (
        "episode,collisions,jammer_hits,hop_violations,"
        "blocks_delivered,overloads,pattern_entropy"
    )
    assert len(lines) == 3

    cfg = GridConfig(q=8, p=40, L=4, m=1, users_per_bs=(2,),
                     jammed_slots=frozenset({1, 5}))
    want = run_episode(cfg, GREEDY_BELIEF, RngSpec(99, 0))
    assert int(lines[1].split(",")[1]) == want.collisions
    assert int(lines[1].split(",")[4]) == want.blocks_delivered

    tr = trace.read_text().strip().splitlines()
    assert tr[0] == "time_slot,freq_slot,occupant_tag"
    assert len(tr) == 1 + 8 * 40

    agg = json.loads(stats_json.read_text())
    assert agg["episodes"] == 2
    assert set(agg["means"]) == set(want.as_dict())


def test_validate_passes_and_is_deterministic(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for path in (a, b):
        code, _, _ = _run(
            capsys, "validate", "--trials", "5000", "--seed", "3",
            "--out", str(path),
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report["passed"] is True
    assert report["n_failed"] == 0
    assert report["n_checks"] == len(report["checks"])
    names = [c["name"] for c in report["checks"]]
    assert len(names) == len(set(names))


def test_validate_detects_broken_tolerance(capsys):
    code, out, _ = _run(
        capsys, "validate", "--trials", "5000", "--rel-tol", "1",
    )
    assert code == 1
    report = json.loads(out)
    assert report["passed"] is False
    assert report["n_failed"] >= 1


def test_exit_codes(capsys, tmp_path):
    # domain error in a config value
    code, _, err = _run(capsys, "dep", "--set", "sigma0_sq=-1",
                        "--snr-db", "0", "--k-list", "4", "--trials", "200")
    assert code == 2 and "error:" in err
    # too few trials is a usage problem, not a per-row failure
    code, _, err = _run(capsys, "dep", "--snr-db", "0", "--k-list", "4",
                        "--trials", "10")
    assert code == 2
    # unreadable config file
    code, _, err = _run(capsys, "dep", "--config", str(tmp_path / "none.conf"),
                        "--snr-db", "0", "--k-list", "4", "--trials", "200")
    assert code == 2
    # argparse usage errors exit 2 by convention
    with pytest.raises(SystemExit) as exc:
        cli.main(["dep", "--format", "yaml"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_nan_cell_renders_as_nan():
    assert cli._fmt_cell(float("nan")) == "nan"
    assert cli._fmt_cell(True) == "true"
    assert cli._fmt_cell(0.30000000000000004) == "0.3"
    assert cli._fmt_cell(3) == "3"
