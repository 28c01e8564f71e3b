"""Report models and their CSV / JSON renderings."""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic.alias_generators import to_camel

from .utils.file_utils import write_text

logger = logging.getLogger(__name__)

CSV_HEADER = ["r", "m0", "rt_re", "rt_im", "pred_re", "pred_im", "ratio_err", "log_growth"]


def format_number(value: Any) -> str:
    """Render a number for CSV output with 17 significant digits."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if value is None:
        return ""
    return "%.17g" % value


class ReportRow(BaseModel):
    """One level of an asymptotic sweep."""

    r: int
    m0: int
    theta_r: float
    rt_re: float
    rt_im: float
    pred_re: float
    pred_im: float
    ratio_err: float = Field(ge=0.0)
    log_growth: float
    residual_growth: Optional[float] = None

    @property
    def rt(self) -> complex:
        return complex(self.rt_re, self.rt_im)

    @property
    def predicted(self) -> complex:
        return complex(self.pred_re, self.pred_im)


class FitSummary(BaseModel):
    """Growth-rate fits over the rows of a sweep."""

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    vol: float
    cs: float
    vol_fit: Optional[float] = None
    vol_gap: Optional[float] = None
    prefactor_exponent_fit: Optional[float] = None
    richardson_vol: Optional[float] = None
    richardson_gap: Optional[float] = None
    branch_flipped: bool = False
    normalization: Literal["effective", "literal"] = "effective"
    delta: Optional[float] = None
    critical_in_region: Optional[bool] = None


class AsymptoticReport(BaseModel):
    """Values of RT_r against the leading-order prediction for a range of levels."""

    p: int
    q: int
    a0: int
    theta: float
    branch: str
    mode: str
    rows: List[ReportRow]
    fit: FitSummary

    @model_validator(mode="after")
    def check_sorted(self) -> "AsymptoticReport":
        levels = [row.r for row in self.rows]
        if levels != sorted(levels) or len(set(levels)) != len(levels):
            raise ValueError("report rows must be sorted by strictly increasing r")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = self.model_dump(exclude={"fit"})
        data["fit"] = self.fit.model_dump(by_alias=True)
        return data


def rows_to_csv(header: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    """CSV text with a fixed column order and '\\n' line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(row.get(name)) for name in header])
    return buffer.getvalue()


def to_csv_text(report: AsymptoticReport) -> str:
    """CSV rendering of the report rows."""
    return rows_to_csv(CSV_HEADER, (row.model_dump() for row in report.rows))


def to_json_text(report: AsymptoticReport) -> str:
    """JSON rendering with the rows and the fit block."""
    return json.dumps(report.to_dict(), indent=2) + "\n"


def render(report: AsymptoticReport, fmt: Literal["csv", "json"] = "csv") -> str:
    if fmt == "csv":
        return to_csv_text(report)
    if fmt == "json":
        return to_json_text(report)
    raise ValueError(f"Unknown report format: {fmt}")


def write_report(report: AsymptoticReport, path: Union[str, Path], fmt: Literal["csv", "json"] = "csv") -> Path:
    """Write the report to ``path`` in the requested format."""
    return write_text(path, render(report, fmt))


GEOMETRY_HEADER = [
    "theta", "vol", "cs", "x0_re", "x0_im", "y0_re", "y0_im", "core_length",
    "hess_det_re", "hess_det_im", "grad_residual", "gluing_residual",
    "nz_re", "nz_im", "vol_decreasing", "above_half",
]


def geometry_rows(family) -> List[Dict[str, Any]]:
    """Rows of a cone family table, with the monotone-volume diagnostic per row."""
    rows = []
    previous = None
    for g, nz, above in zip(family.geometries, family.nz_derivatives, family.above_half):
        row = g.to_dict()
        row["nz_re"] = nz.real
        row["nz_im"] = nz.imag
        row["vol_decreasing"] = previous is None or g.vol < previous
        row["above_half"] = above
        rows.append(row)
        previous = g.vol
    return rows
