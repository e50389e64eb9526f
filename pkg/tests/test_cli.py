"""Tests for config parsing, the experiment runner, and reproducibility."""

import json

import pytest

from geomlab.cli import (ConfigError, load_config, main, parse_list,
                         parse_number)


def test_number_parsing():
    assert parse_number("2^-6") == 2.0 ** -6
    assert parse_number("0.125") == 0.125
    assert parse_list("2^-4 0.5 1") == [0.0625, 0.5, 1.0]


def test_defaults_and_overrides(tmp_path):
    cfg = load_config("incidence-sweep", None, str(tmp_path), seed=7,
                      verify=False)
    assert cfg.seed == 7
    assert cfg.floats("deltas")[0] == 2.0 ** -6
    ini = tmp_path / "cfg.ini"
    ini.write_text("[incidence-sweep]\ndeltas = 2^-5 2^-6\nseed = 99\n")
    cfg2 = load_config("incidence-sweep", str(ini), str(tmp_path), None, False)
    assert cfg2.floats("deltas") == [2.0 ** -5, 2.0 ** -6]
    assert cfg2.seed == 99


def test_unknown_experiment_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config("nonsense", None, str(tmp_path), None, False)


def test_empty_sweep_list_exits_2(tmp_path):
    ini = tmp_path / "cfg.ini"
    ini.write_text("[incidence-sweep]\ndeltas =\n")
    rc = main(["incidence-sweep", "--config", str(ini),
               "--out", str(tmp_path / "out")])
    assert rc == 2


def test_missing_config_file_exits_2(tmp_path):
    rc = main(["incidence-sweep", "--config", str(tmp_path / "nope.ini"),
               "--out", str(tmp_path / "out")])
    assert rc == 2


def test_incidence_sweep_run_and_artifacts(tmp_path):
    ini = tmp_path / "cfg.ini"
    ini.write_text("[incidence-sweep]\ndeltas = 2^-6 2^-7 2^-8\n")
    out = tmp_path / "out"
    rc = main(["incidence-sweep", "--config", str(ini), "--out", str(out),
               "--verify"])
    assert rc == 0
    csv_text = (out / "incidence-sweep.csv").read_text()
    assert csv_text.startswith("# experiment=incidence-sweep")
    assert "delta,n_points,n_lines,count,ratio" in csv_text
    summary = json.loads((out / "incidence-sweep_summary.json").read_text())
    assert summary["ratio_band"] <= 100.0
    assert (out / "report.txt").exists()


def test_reproducibility_and_thread_independence(tmp_path, monkeypatch):
    out1, out2, out3 = (tmp_path / d for d in ("a", "b", "c"))
    args = ["incidence-sweep", "--seed", "5"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    monkeypatch.setenv("LAB_THREADS", "4")  # rows evaluated in a thread pool
    assert main(args + ["--out", str(out3)]) == 0
    b1 = (out1 / "incidence-sweep.csv").read_bytes()
    assert b1 == (out2 / "incidence-sweep.csv").read_bytes()
    assert b1 == (out3 / "incidence-sweep.csv").read_bytes()


def test_duality_check_cli(tmp_path):
    rc = main(["duality-check", "--out", str(tmp_path / "out")])
    assert rc == 0
    summary = json.loads(
        (tmp_path / "out" / "duality-check_summary.json").read_text())
    assert summary["failures"] == 0


def test_sobolev_check_cli_flags(tmp_path):
    rc = main(["sobolev-check", "--out", str(tmp_path / "out"),
               "--function", "bump", "--width", "0.5", "--h", "1/32"])
    assert rc == 0
    summary = json.loads(
        (tmp_path / "out" / "sobolev-check_summary.json").read_text())
    assert summary["lemma_ok"] is True


def test_rich_points_kstar_records_infeasible_rows(tmp_path):
    ini = tmp_path / "cfg.ini"
    # k = 16 at epsilon = 16 delta busts the slope budget at delta = 2^-6:
    # the run must keep going and record the row as infeasible
    ini.write_text("[rich-points]\nfamily = k_star\ndeltas = 2^-6 2^-10\n"
                   "ks = 2 16\nepsilon_ratios = 16\n")
    out = tmp_path / "out"
    rc = main(["rich-points", "--config", str(ini), "--out", str(out)])
    assert rc == 0
    text = (out / "rich-points.csv").read_text()
    assert "infeasible" in text
    rows = [l for l in text.splitlines() if not l.startswith("#")]
    assert len(rows) == 1 + 4  # header + 2 deltas x 2 ks


def test_generator_spec_section(tmp_path):
    ini = tmp_path / "cfg.ini"
    ini.write_text("[incidence-sweep]\nkind = random\nn_points = 120\n"
                   "n_lines = 150\ndeltas = 2^-6\nseed = 3\n")
    out = tmp_path / "out"
    rc = main(["incidence-sweep", "--config", str(ini), "--out", str(out),
               "--verify"])
    assert rc == 0
    text = (out / "incidence-sweep.csv").read_text()
    assert ",120,150," in text.replace("120,150", "120,150")
    rows = [l for l in text.splitlines() if not l.startswith("#")]
    assert rows[1].split(",")[1:3] == ["120", "150"]
