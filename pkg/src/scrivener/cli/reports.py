"""Writers for the JSON, CSV, table and Markdown outputs of the commands."""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence

from jinja2 import Environment, FileSystemLoader, StrictUndefined
from tabulate import tabulate

from scrivener.config.settings import settings
from scrivener.constants import Paths
from scrivener.lib.fs_utils import atomic_write_text
from scrivener.models.schemas import CalibrationReport, MetricsReport, RejectionCurve


def write_json(path: Path, data: Any) -> Path:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    atomic_write_text(Path(path), json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return Path(path)


def write_jsonl(path: Path, records: Iterable[Mapping[str, Any]]) -> Path:
    lines = [json.dumps(record, ensure_ascii=False) for record in records]
    atomic_write_text(Path(path), "\n".join(lines) + ("\n" if lines else ""))
    return Path(path)


def read_jsonl(path: Path) -> List[Dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: ("" if row.get(key) is None else row.get(key)) for key in columns})
    atomic_write_text(Path(path), buffer.getvalue())
    return Path(path)


def metrics_table(report: MetricsReport) -> str:
    rows = [
        ["ED", f"{report.mean_ed:.4f} ± {report.mean_ed_sem:.4f}", f"{report.median_ed:.4f}"],
        ["NED", f"{report.mean_ned:.4f} ± {report.mean_ned_sem:.4f}", f"{report.median_ned:.4f}"],
        ["FK MAE", f"{report.fk_mae:.4f} ± {report.fk_mae_sem:.4f}", ""],
        ["LIX MAE", f"{report.lix_mae:.4f} ± {report.lix_mae_sem:.4f}", ""],
    ]
    return tabulate(rows, headers=["metric", "mean", "median"], tablefmt="github") + f"\n\nN = {report.n}\n"


def calibration_table(report: CalibrationReport) -> str:
    rows = [
        [f"({b.lower:.2f}, {b.upper:.2f}]", b.count, _fmt(b.mean_confidence), _fmt(b.accuracy)]
        for b in report.bins
    ]
    table = tabulate(rows, headers=["bin", "count", "confidence", "accuracy"], tablefmt="github")
    return f"{table}\n\nECE = {report.ece:.4f}  MCE = {report.mce:.4f}\n"


def calibration_rows(report: CalibrationReport) -> List[Dict[str, Any]]:
    return [b.model_dump() for b in report.bins]


def rejection_rows(curves: Sequence[RejectionCurve]) -> List[Dict[str, Any]]:
    """One row per rejection fraction with a column per curve metric."""
    rows = []
    for index, point in enumerate(curves[0].points):
        row: Dict[str, Any] = {"rejection": point.rejection, "retained": point.retained}
        for curve in curves:
            row[curve.metric] = curve.points[index].value
        rows.append(row)
    return rows


def render_summary(summary: Mapping[str, Any]) -> str:
    """Markdown experiment summary from the packaged template."""
    env = Environment(loader=FileSystemLoader(settings.packaged_templates_dir), undefined=StrictUndefined, keep_trailing_newline=True)
    env.filters["fmt"] = _fmt
    return env.get_template(Paths.SUMMARY_TEMPLATE_FILE).render(**summary)


def _fmt(value: Any, digits: int = 4) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)
