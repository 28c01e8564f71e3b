import json

import pytest
from pydantic import ValidationError

from qvol.reports import (
    CSV_HEADER,
    AsymptoticReport,
    FitSummary,
    ReportRow,
    format_number,
    render,
    to_csv_text,
    to_json_text,
    write_report,
)


def _row(r, ratio_err=0.01):
    return ReportRow(
        r=r, m0=(r - 2) // 4, theta_r=3.1, rt_re=1.5, rt_im=-0.25, pred_re=1.49, pred_im=-0.24,
        ratio_err=ratio_err, log_growth=1.7,
    )


def _report(levels=(21, 31)):
    return AsymptoticReport(
        p=5, q=1, a0=0, theta=3.14, branch="minus", mode="symmetrized",
        rows=[_row(r) for r in levels],
        fit=FitSummary(vol=1.8, cs=0.1, vol_fit=1.79, vol_gap=0.01),
    )


def test_format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(3) == "3"
    assert format_number(True) == "1"
    assert format_number(None) == ""


def test_csv_header_and_rows():
    text = to_csv_text(_report())
    lines = text.split("\n")
    assert lines[0] == "r,m0,rt_re,rt_im,pred_re,pred_im,ratio_err,log_growth"
    assert lines[0].split(",") == CSV_HEADER
    assert lines[1].startswith("21,4,1.5,-0.25,")
    assert text.endswith("\n") and "\r" not in text


def test_json_fit_block_uses_camel_case():
    data = json.loads(to_json_text(_report()))
    assert data["fit"]["volFit"] == 1.79
    assert "branchFlipped" in data["fit"]
    assert [row["r"] for row in data["rows"]] == [21, 31]


def test_rows_must_increase():
    with pytest.raises(ValidationError):
        _report(levels=(31, 21))
    with pytest.raises(ValidationError):
        _report(levels=(21, 21))


def test_ratio_error_is_non_negative():
    with pytest.raises(ValidationError):
        _row(21, ratio_err=-0.1)


def test_render_and_write(tmp_path):
    report = _report()
    with pytest.raises(ValueError):
        render(report, "xml")
    path = write_report(report, tmp_path / "out" / "sweep.json", "json")
    assert json.loads(path.read_text(encoding="utf-8"))["p"] == 5


def test_row_complex_views():
    row = _row(21)
    assert row.rt == complex(1.5, -0.25)
    assert row.predicted == complex(1.49, -0.24)
