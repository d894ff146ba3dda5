import csv
import json

import pytest

from csicut import cli
from csicut.dataset import ingest_csv, write_csv
from csicut.diagnostics import diagnostic_table
from csicut.errors import DataError, ReportIOError, StageError
from csicut.pipeline import (
    PipelineConfig,
    derive_seed,
    emit_report,
    generate_fixture,
    load_groups,
    run_pipeline,
    table5_cohort,
)


@pytest.fixture(scope="module")
def seed7_report():
    return run_pipeline(PipelineConfig(synthetic="table3", seed=7))


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(7, "kmeans") == derive_seed(7, "kmeans")
    assert derive_seed(7, "kmeans") != derive_seed(7, "som")
    assert derive_seed(7, "kmeans") != derive_seed(8, "kmeans")
    assert 0 <= derive_seed(0, "x") < 2**32


def test_config_validation():
    with pytest.raises(DataError):
        PipelineConfig().validate()
    with pytest.raises(DataError):
        PipelineConfig(synthetic="table3", variance_threshold=0).validate()
    with pytest.raises(DataError):
        PipelineConfig(synthetic="table3", k=1).validate()
    with pytest.raises(DataError):
        PipelineConfig(synthetic="table3", cutoffs=(40, 30)).validate()
    with pytest.raises(DataError):
        PipelineConfig(synthetic="table3", algorithms=("Spectral",)).validate()


def test_smoke_seed7(seed7_report):
    r = seed7_report
    assert r.chosen in r.assignments
    assert r.assignments[r.chosen].k == 3
    assert set(r.cutoffs) == {"Overall", "Females", "Males"}
    assert set(r.tables) == {"table3", "table4"}
    assert len(r.validity) == 4
    assert r.data["input"]["n_subjects"] == 151
    assert r.data["split"]["low"] + r.data["split"]["high"] == 151
    assert r.data["skipped"] == {}


def test_emit_report_files(seed7_report, tmp_path):
    manifest = emit_report(seed7_report, tmp_path)
    assert len(manifest) >= 7
    expected = {"report.json", "table2.csv", "table5_overall.csv", "table5_females.csv", "table5_males.csv",
                "dendrogram.json", "dendrogram.nwk", "assignments.csv", "boxplot_data.csv"}
    assert expected <= set(manifest)
    stored = json.loads((tmp_path / "manifest.json").read_text())
    assert stored["files"] == manifest
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["config"]["seed"] == 7 and report["toolkit_version"]
    rows = list(csv.DictReader(open(tmp_path / "boxplot_data.csv")))
    assert len(rows) == 151 and {r["cluster"] for r in rows} == {"A", "B", "C"}


def test_emit_report_io_error(seed7_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ReportIOError):
        emit_report(seed7_report, blocker)


def test_threshold_one_keeps_all_components():
    r = run_pipeline(PipelineConfig(synthetic="table3", seed=1, variance_threshold=1.0,
                                    algorithms=("KMeans", "Hierarchical")))
    assert r.data["pca"]["retained"] == 9
    assert "Overall" in r.cutoffs


def test_hc_mode_and_sweep():
    r = run_pipeline(PipelineConfig(synthetic="table3", seed=2, mode="HC_vs_C", sweep=(2, 3, 4),
                                    algorithms=("Hierarchical",)))
    low = r.split.low_ids
    index = {rid: i for i, rid in enumerate(r.cohort.ids)}
    assert all(r.cohort[index[i]].cohort == "HC" for i in low)
    assert set(r.data["silhouette_sweep"]["Hierarchical"]) == {2, 3, 4}


def test_missing_input_is_stage_tagged(tmp_path):
    with pytest.raises(StageError) as info:
        run_pipeline(PipelineConfig(input=tmp_path / "nope.csv"))
    assert info.value.stage == "ingest"


def test_small_cohort_degrades_gracefully(tmp_path):
    from csicut.dataset import TABLE3_PROFILE, generate_synthetic
    cohort = generate_synthetic(TABLE3_PROFILE, n_per_cluster=(4, 4, 4), seed=0)
    path = write_csv(cohort, tmp_path / "small.csv")
    r = run_pipeline(PipelineConfig(input=path, algorithms=("KMeans", "DBSCAN")))
    # all-noise DBSCAN is reported but unscored
    assert r.assignments["DBSCAN"].k == 0
    assert not [v for v in r.validity if v.algorithm == "DBSCAN"][0].scored
    assert r.chosen == "KMeans"
    # subgroups with an empty side are skipped with a marker
    for name in ("Overall", "Females", "Males"):
        assert name in r.cutoffs or f"cutoff:{name}" in r.data["skipped"]


def test_failed_algorithm_is_skipped(monkeypatch):
    from csicut import pipeline
    from csicut.errors import KOutOfRange

    def broken(*a, **k):
        raise KOutOfRange("too few nodes")
    monkeypatch.setattr(pipeline, "som", broken)
    r = run_pipeline(PipelineConfig(synthetic="table3", seed=0))
    assert "SOM" not in r.assignments
    assert r.data["skipped"] == {"cluster:SOM": "too few nodes"}
    assert len(r.validity) == 3


def test_fixtures(tmp_path):
    a = generate_fixture("table3_profile", 5, tmp_path / "a")
    b = generate_fixture("table3_profile", 5, tmp_path / "b")
    assert a[0].read_bytes() == b[0].read_bytes()
    assert len(ingest_csv(a[0])) == 151
    files = generate_fixture("table5_confusion", 0, tmp_path / "t5")
    cohort = ingest_csv(files[0])
    split = load_groups(files[1])
    row = diagnostic_table(split, cohort, [35])[0]
    assert (row.tp, row.fn, row.tn, row.fp) == (29, 9, 86, 27)
    with pytest.raises(DataError):
        generate_fixture("nope", 0, tmp_path)


def test_table5_cohort_hc_count():
    cohort, _ = table5_cohort()
    assert sum(r.cohort == "HC" for r in cohort) == 63
    assert len(cohort) == 151


# --- command line -------------------------------------------------------------

def test_cli_run(tmp_path, capsys):
    assert cli.main(["run", "--synthetic", "table3", "--seed", "7", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "overall cut-off" in out
    assert (tmp_path / "o" / "report.json").exists()


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main([]) == 1
    assert cli.main(["run", "--out", str(tmp_path)]) == 1
    assert cli.main(["run", "--synthetic", "table3", "--cutoffs", "40:30", "--out", str(tmp_path)]) == 1
    assert cli.main(["run", "--synthetic", "table3", "--k", "1", "--out", str(tmp_path)]) == 1
    assert cli.main(["fixture", "--kind", "bogus", "--out", str(tmp_path)]) == 1
    assert cli.main(["run", "--synthetic", "table3", "--algorithms", "Foo", "--out", str(tmp_path)]) == 1


def test_cli_data_errors(tmp_path, capsys):
    assert cli.main(["run", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o")]) == 2
    assert "[ingest]" in capsys.readouterr().err
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert cli.main(["run", "--synthetic", "table3", "--algorithms", "KMeans", "--out", str(blocker)]) == 2


def test_cli_internal_error(monkeypatch, tmp_path):
    def boom(*a, **k):
        raise RuntimeError("bug")
    monkeypatch.setattr(cli, "run_pipeline", boom)
    assert cli.main(["run", "--synthetic", "table3", "--out", str(tmp_path)]) == 3


def test_cli_fixture_and_table(tmp_path, capsys):
    assert cli.main(["fixture", "--kind", "table5_confusion", "--out", str(tmp_path / "fx")]) == 0
    assert cli.main(["table", "--input", str(tmp_path / "fx" / "table5_cohort.csv"),
                     "--groups", str(tmp_path / "fx" / "table5_groups.csv"), "--out", str(tmp_path / "t")]) == 0
    out = capsys.readouterr().out
    assert "Overall: cut-off 35" in out and "Females: cut-off 34" in out and "Males: cut-off 35" in out
    line = (tmp_path / "t" / "table5_overall.csv").read_text().splitlines()[16]
    assert line.startswith("35,0.76,0.52,0.76,0.76,0.52,0.91,3.19,0.31")


def test_cli_from_csv(tmp_path):
    assert cli.main(["fixture", "--kind", "table3_profile", "--seed", "3", "--out", str(tmp_path / "fx")]) == 0
    args = ["run", "--input", str(tmp_path / "fx" / "table3_cohort.csv"), "--mode", "hc-vs-c",
            "--subgroups", "Overall", "--silhouette-sweep", "2:4", "--out", str(tmp_path / "o")]
    assert cli.main(args) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["split"]["mode"] == "HC_vs_C"
    assert list(report["cutoffs"]) == ["Overall"]
    assert "sha256" in report["input"]
