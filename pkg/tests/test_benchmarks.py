import numpy as np
import pytest

from ncm_doa.cli import RunConfig, run_pipeline
from ncm_doa.evaluation import read_rows

AZIMUTHS = (10.0, 30.0, 50.0, 70.0, 90.0, 110.0)


def _run(tmp_path, scenarios, methods):
    run = RunConfig(
        scenarios=scenarios,
        duration=2.0,
        methods=methods,
        output=tmp_path / "runs",
    )
    assert run_pipeline(run, progress=False) == 0
    return read_rows(tmp_path / "runs" / "metrics.csv")


def _median(rows, method, metric):
    values = [float(row[metric]) for row in rows if row["method"] == method]
    assert values, method
    return float(np.median(values))


@pytest.mark.slow
def test_desk_benchmark_direction_errors(tmp_path):
    scenarios = [
        {
            "t60_ms": 0.0,
            "sir_db": 0.0,
            "scr_db": 5.0,
            "interferer_azimuth": azimuth,
            "seed": seed,
        }
        for azimuth in AZIMUTHS
        for seed in range(20)
    ]
    rows = _run(tmp_path, scenarios, ["NCM-LCMV", "MSC", "wMSC"])
    ncm = _median(rows, "NCM-LCMV", "doa_error_deg")
    assert ncm <= 5.0
    assert ncm < _median(rows, "MSC", "doa_error_deg")
    assert ncm < _median(rows, "wMSC", "doa_error_deg")


@pytest.mark.slow
def test_reverberant_enhancement_ordering(tmp_path):
    scenarios = [
        {
            "t60_ms": t60,
            "sir_db": sir,
            "scr_db": scr,
            "interferer_azimuth": azimuth,
            "seed": seed,
        }
        for t60 in (500.0, 800.0)
        for sir in (-10.0, 0.0)
        for scr in (0.0, 5.0)
        for azimuth in AZIMUTHS
        for seed in range(3)
    ]
    assert len(scenarios) >= 100
    rows = _run(tmp_path, scenarios, ["NCM-LCMV", "MUSIC-LCMP"])
    assert _median(rows, "NCM-LCMV", "isrf_db") > _median(rows, "MUSIC-LCMP", "isrf_db")
    assert _median(rows, "NCM-LCMV", "dsrf_db") <= _median(
        rows, "MUSIC-LCMP", "dsrf_db"
    )
