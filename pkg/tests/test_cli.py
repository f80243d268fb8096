import csv
import json
from pathlib import Path

import pytest

from interlock_quality.cli import ConfigError, RunConfig, cmd_fixture, main

QUICK = """\
[input]
companies = {companies}
affiliations = {affiliations}

[metrics]
k_grid = 50 100 200

[sir]
ensemble = 40

[run]
seed = 3
"""


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fx")
    files = cmd_fixture(d, "interlock", 0)
    cfg = d / "quick.ini"
    cfg.write_text(QUICK.format(companies=Path(files["companies"]).name,
                                affiliations=Path(files["affiliations"]).name))
    return d


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def tree_bytes(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(Path(d).rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def pipeline_runs(fixture_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    cfg = str(fixture_dir / "quick.ini")
    for name, threads in (("a", "1"), ("b", "1"), ("c", "3")):
        assert main(["pipeline", "--config", cfg, "--out-dir", str(out / name), "--threads", threads]) == 0
    return out


def test_pipeline_repeatable_and_thread_invariant(pipeline_runs):
    a, b, c = (tree_bytes(pipeline_runs / n) for n in "abc")
    assert a == b
    assert a == c


def test_report_lists_each_stage_once_and_files_exist(pipeline_runs):
    d = pipeline_runs / "a"
    report = json.loads((d / "report.json").read_text())
    assert report["stage_order"] == ["original", "step1", "step2"]
    assert sorted(report["stages"]) == sorted(report["stage_order"])
    for entry in report["stages"].values():
        for key in ("centrality_file", "rank_correlation_file"):
            assert (d / entry[key]).is_file()
        assert (d / entry["sir"]["trajectory_file"]).is_file()
        assert (d / entry["sir"]["final_sizes_file"]).is_file()
    for entry in report["merge_reports"].values():
        assert (d / entry["file"]).is_file()
    assert report["config"]["ensemble"] == 40 and "threads" not in report["config"]


def test_metrics_on_exported_graph_match_pipeline(pipeline_runs, fixture_dir, tmp_path):
    cfg = str(fixture_dir / "quick.ini")
    assert main(["export", "--config", cfg, "--out-dir", str(tmp_path / "exp")]) == 0
    report = json.loads((pipeline_runs / "a" / "report.json").read_text())
    for stage in ("original", "step2"):
        out = tmp_path / f"m_{stage}"
        assert main(["metrics", "--config", cfg, "--out-dir", str(out), "--stage", stage,
                     "--edges", str(tmp_path / "exp" / f"{stage}_edges.tsv"),
                     "--nodes", str(tmp_path / "exp" / f"{stage}_nodes.tsv")]) == 0
        got = json.loads((out / f"metrics_{stage}.json").read_text())
        assert got["topology"] == report["stages"][stage]["topology"]
        assert got["rank_correlation"] == report["stages"][stage]["rank_correlation"]
        for name in (f"centrality_{stage}.csv", f"rank_correlation_{stage}.csv"):
            assert (out / name).read_bytes() == (pipeline_runs / "a" / name).read_bytes()


def test_missing_input_names_path(tmp_path, capsys):
    missing = tmp_path / "nowhere" / "companies.csv"
    code = main(["pipeline", "--companies", str(missing), "--affiliations", str(missing),
                 "--out-dir", str(tmp_path / "o")])
    assert code != 0
    assert str(missing) in capsys.readouterr().err


def test_stage_errors_carry_context(tmp_path, capsys):
    (tmp_path / "c.csv").write_text("firm,country\nA,SE\n")
    (tmp_path / "a.csv").write_text("director_id,firm_id\nd,A\n")
    code = main(["clean", "--companies", str(tmp_path / "c.csv"), "--affiliations", str(tmp_path / "a.csv"),
                 "--out-dir", str(tmp_path / "o")])
    assert code == 1
    assert "[ingest]" in capsys.readouterr().err


def test_clean_on_clean_graph_merges_nothing(tmp_path):
    # a path of firms with distinct boards, owners and sizes
    lines = ["firm_id,country,revenue_usd,employees,guo_id"]
    lines += [f"F{i},SE,{10 ** (i % 5 + 3)},{5 * i + 1},G{i}" for i in range(8)]
    (tmp_path / "c.csv").write_text("\n".join(lines) + "\n")
    aff = ["director_id,firm_id"]
    for i in range(8):
        aff += [f"own{i}a,F{i}", f"own{i}b,F{i}", f"own{i}c,F{i}"]
    aff += [f"link{i},F{i}" for i in range(8)] + [f"link{i},F{i + 1}" for i in range(7)]
    (tmp_path / "a.csv").write_text("\n".join(aff) + "\n")
    out = tmp_path / "o"
    assert main(["clean", "--companies", str(tmp_path / "c.csv"), "--affiliations", str(tmp_path / "a.csv"),
                 "--out-dir", str(out)]) == 0
    summary = json.loads((out / "clean.json").read_text())
    assert all(r["merged_blocks"] == 0 for r in summary["merge_reports"].values())
    assert (out / "original_edges.tsv").read_bytes() == (out / "step2_edges.tsv").read_bytes()


def test_sir_single_run(fixture_dir, tmp_path):
    cfg = str(fixture_dir / "quick.ini")
    assert main(["export", "--config", cfg, "--out-dir", str(tmp_path / "exp")]) == 0
    out = tmp_path / "s"
    assert main(["sir", "--out-dir", str(out), "--ensemble", "1", "--stage", "step1",
                 "--edges", str(tmp_path / "exp" / "step1_edges.tsv")]) == 0
    finals = read_csv(out / "sir_step1_final_sizes.csv")
    assert len(finals) == 1
    traj = read_csv(out / "sir_step1_trajectory.csv")
    assert traj[0]["iteration"] == "0" and float(traj[-1]["mean_I"]) == 0.0
    assert json.loads((out / "sir_step1.json").read_text())["sir"]["params"]["ensemble"] == 1


def test_band_flag_changes_step2(fixture_dir, tmp_path):
    cfg = str(fixture_dir / "quick.ini")
    counts = {}
    for band in ("0.8", "0.95"):
        out = tmp_path / band
        assert main(["clean", "--config", cfg, "--out-dir", str(out), "--band", band]) == 0
        counts[band] = json.loads((out / "clean.json").read_text())["config"]["band"]
    assert counts == {"0.8": 0.8, "0.95": 0.95}


def test_completeness_on_panel(tmp_path):
    files = cmd_fixture(tmp_path / "panel", "panel", 0)
    (tmp_path / "p.ini").write_text(
        "[input]\n"
        f"companies = {files['companies']}\n"
        f"aggregates = {files['aggregates']}\n"
        f"indicators = {files['indicators']}\n"
        "log_indicators = NY.GDP.PCAP.KD IC.TAX.DURS\n"
        "[completeness]\nn_models = 40\ncore_size = 4\ncoefficients = fit\n")
    out = tmp_path / "out"
    assert main(["completeness", "--config", str(tmp_path / "p.ini"), "--out-dir", str(out)]) == 0
    rows = read_csv(out / "completeness.csv")
    assert rows and all(0 < float(r["C"]) <= 1 for r in rows)
    assert {r["r_hat_source"] for r in rows} >= {"aggregate", "model"}
    model = json.loads((out / "indicator_model.json").read_text())
    assert len(model["indicators"]) == 4
    hist = read_csv(out / "histograms" / f"histogram_{rows[0]['country']}.csv")
    assert list(hist[0]) == ["bin_low", "bin_high", "observed", "expected"]
    assert (out / "coverage.csv").is_file()


def test_config_rejects_unknown_keys(tmp_path, capsys):
    (tmp_path / "bad.ini").write_text("[sir]\nbetta = 0.4\n")
    assert main(["sir", "--config", str(tmp_path / "bad.ini"), "--edges", "x"]) == 1
    assert "betta" in capsys.readouterr().err
    (tmp_path / "bad2.ini").write_text("[plots]\nx = 1\n")
    with pytest.raises(ConfigError):
        RunConfig.from_file(tmp_path / "bad2.ini")


def test_config_values_and_flag_precedence(tmp_path):
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "c.ini").write_text(
        "[input]\ncompanies = data/c.csv\n[accuracy]\nband = 0.7\n[metrics]\nk_grid = 10, 20\n"
        "distance_sample = exact\n[run]\nstages = step2 original\n")
    cfg = RunConfig.from_file(tmp_path / "sub" / "c.ini")
    assert cfg.band == 0.7 and cfg.k_grid == (10, 20) and cfg.distance_sample is None
    assert cfg.resolve("companies") == tmp_path / "sub" / "data" / "c.csv"
    cfg.override(band=0.9, seed=None)
    assert cfg.band == 0.9 and cfg.seed == 0
    cfg.companies = None
    cfg.validate()
    assert cfg.stages == ("original", "step2")
    cfg.band = 1.5
    with pytest.raises(ValueError):
        cfg.validate()
