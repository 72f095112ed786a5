"""
Tests for result CSVs, plot data and threshold reports
"""

import sys
from pathlib import Path

import pandas as pd
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from montecarlo import CSV_COLUMNS, ExperimentResult
from report_builder import build_report, curve_table
from results_store import ResultsStore, plot_data, read_results, series_label

GRID = [0.04, 0.05, 0.06, 0.08]
SHOTS = 100000


def power_law_results(mode="exact", threshold=0.07, distances=(3, 5), experiment_id="synthetic"):
    """Rows whose rates follow 0.5·(p/threshold)^((d+1)/2)"""
    results = []
    for d in distances:
        for p in GRID:
            rate = 0.5 * (p / threshold) ** ((d + 1) / 2)
            failures = int(round(rate * SHOTS))
            results.append(ExperimentResult(
                experiment_id, d, mode, "amplitude_damping", p, "total",
                SHOTS, failures, 0, failures / SHOTS, (rate * (1 - rate) / SHOTS) ** 0.5,
            ))
    return results


def test_store_round_trip(tmp_path):
    """Results written by the store read back with a kept column"""
    store = ResultsStore(tmp_path / "out")
    path = store.write_results(power_law_results())
    assert path.name == "results.csv"
    frame = read_results(tmp_path / "out")
    assert list(frame.columns[: len(CSV_COLUMNS)]) == CSV_COLUMNS
    assert len(frame) == 2 * len(GRID)
    assert (frame["kept"] == SHOTS).all()
    assert store.files() == [path]


def test_read_results_concatenates(tmp_path):
    """Several files load as one table"""
    ResultsStore(tmp_path / "a").write_results(power_law_results(experiment_id="a"))
    ResultsStore(tmp_path / "b").write_results(power_law_results(experiment_id="b"))
    frame = read_results([tmp_path / "a", tmp_path / "b" / "results.csv"])
    assert set(frame["experiment_id"]) == {"a", "b"}


def test_read_results_errors(tmp_path):
    """Missing files and missing columns are reported"""
    with pytest.raises(FileNotFoundError):
        read_results(tmp_path / "nothing.csv")
    bad = tmp_path / "bad.csv"
    pd.DataFrame({"d": [3], "rate": [0.1]}).to_csv(bad, index=False)
    with pytest.raises(ValueError, match="missing columns"):
        read_results(bad)


def test_plot_data_bands():
    """Long rows carry a ±1σ band clipped at zero"""
    frame = pd.DataFrame([r.to_row() for r in power_law_results()])
    frame.loc[0, "stderr"] = 1.0
    long = plot_data(frame)
    assert len(long) == len(frame)
    assert (long["lower"] >= 0).all()
    assert (long["upper"] >= long["rate"]).all()
    assert set(long["series"]) == {"exact/phenomenological"}
    assert plot_data(frame.iloc[0:0]).empty


def test_series_label_includes_cutoff():
    row = pd.Series({"mode": "exact", "noise_model": "circuit_layered", "epsilon": 1e-4})
    assert series_label(row) == "exact/circuit_layered/eps=0.0001"


def test_curve_table_layout():
    """Parameters down, distances across"""
    frame = pd.DataFrame([r.to_row() for r in power_law_results()])
    table = curve_table(frame)
    assert list(table.columns) == ["d=3", "d=5"]
    assert list(table.index) == GRID


def test_report_threshold_and_mode_comparison():
    """Each mode gets a threshold; the comparison reports the ratio to exact"""
    rows = power_law_results("exact", 0.07) + power_law_results("pta", 0.077)
    frame = pd.DataFrame([r.to_row() for r in rows])
    report = build_report(frame, n_boot=30, seed=1)
    assert len(report.groups) == 2
    thresholds = {g.key[3]: g.estimate.threshold for g in report.groups}
    assert thresholds["exact"] == pytest.approx(0.07, rel=1e-3)
    assert thresholds["pta"] == pytest.approx(0.077, rel=1e-3)
    ratios = dict(zip(report.comparison["mode"], report.comparison["ratio"]))
    assert ratios["exact"] == 1.0
    assert ratios["pta"] == pytest.approx(1.1, rel=2e-3)
    text = report.render()
    assert "Threshold:" in text
    assert "Mode comparison" in text


def test_report_single_distance_notice():
    """One distance gives a notice instead of a threshold"""
    frame = pd.DataFrame([r.to_row() for r in power_law_results(distances=(3,))])
    report = build_report(frame, n_boot=10)
    assert report.groups[0].estimate is None
    assert "Only one distance" in report.render()
    assert report.comparison.empty


def test_report_no_crossing_notice():
    """Separated curves are reported, not raised"""
    rows = power_law_results(threshold=0.2)
    for row in rows:
        if row.d == 5:
            row.rate = row.rate / 100
    frame = pd.DataFrame([r.to_row() for r in rows])
    report = build_report(frame, n_boot=10)
    assert report.groups[0].estimate is None
    assert report.groups[0].notice.startswith("No crossing")
