import pytest

from ncm_doa.evaluation import (
    EnhancementReport,
    group_statistics,
    read_rows,
    report,
    resolve_metric,
    resolve_parameter,
    write_metrics_csv,
)
from ncm_doa.exceptions import UnknownParameterError


def _reports():
    reports = []
    for t60 in (0.0, 500.0):
        for sir in (-10.0, 0.0, 5.0):
            for method, error in (("MSC", 2.0), ("NCM-LCMV", 1.0)):
                reports.append(
                    EnhancementReport(
                        scenario_id=f"t{t60:g}-sir{sir:g}",
                        method=method,
                        parameters={"t60_ms": t60, "sir_db": sir},
                        doa_error_deg=error + sir / 10,
                        gsnr_db=None if method == "MSC" else 3.0,
                    )
                )
    return reports


@pytest.mark.parametrize(
    ("name", "column"),
    [
        ("t60", "t60_ms"),
        ("T60_ms", "t60_ms"),
        ("theta_b", "interferer_azimuth"),
        ("dx", "desired_distance"),
        ("d_p", "interferer_distance"),
        ("scr", "scr_db"),
    ],
)
def test_resolve_parameter(name, column):
    assert resolve_parameter(name) == column


def test_unknown_names_are_rejected():
    with pytest.raises(UnknownParameterError, match="t60"):
        resolve_parameter("t6O")
    with pytest.raises(UnknownParameterError):
        resolve_metric("pesq")
    assert resolve_metric("isrf_db") == "isrf_db"


def test_group_statistics_per_value_and_method():
    rows = [r.row() for r in _reports()]
    stats = group_statistics(rows, "t60")
    assert [(s["value"], s["method"]) for s in stats] == [
        ("0", "MSC"),
        ("0", "NCM-LCMV"),
        ("500", "MSC"),
        ("500", "NCM-LCMV"),
    ]
    first = stats[0]
    assert first["count"] == "3"
    assert first["p50"] == "2.000000"
    assert first["parameter"] == "t60_ms"


def test_empty_metric_cells_are_skipped():
    rows = [r.row() for r in _reports()]
    stats = group_statistics(rows, "sir", metric="gsnr_db")
    assert {s["method"] for s in stats} == {"NCM-LCMV"}
    assert [s["value"] for s in stats] == ["-10", "0", "5"]
    assert all(s["count"] == "2" for s in stats)


def test_report_writes_next_to_the_metrics(tmp_path):
    metrics = write_metrics_csv(tmp_path / "metrics.csv", _reports())
    path = report(metrics, "sir")
    assert path == tmp_path / "metrics-by-sir_db.csv"
    rows = read_rows(path)
    assert len(rows) == 6
    assert rows[0]["metric"] == "doa_error_deg"

    custom = report(metrics, "t60", tmp_path / "custom.csv", metric="gsnr_db")
    assert read_rows(custom)[0]["p9"] == "3.000000"


def test_report_stacks_several_metrics(tmp_path):
    metrics = write_metrics_csv(tmp_path / "metrics.csv", _reports())
    path = report(metrics, "sir", metric=["gsnr_db", "doa_error_deg", "gsnr_db"])
    rows = read_rows(path)
    assert [row["metric"] for row in rows] == ["gsnr_db"] * 3 + ["doa_error_deg"] * 6
    assert rows[0]["method"] == "NCM-LCMV"
    with pytest.raises(UnknownParameterError):
        report(metrics, "sir", metric=["doa_error_deg", "pesq"])
