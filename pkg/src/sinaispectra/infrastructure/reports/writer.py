"""Suite report writers

Each run writes `<suite>.json` (sorted keys, schema and library version,
config echo), `<suite>.csv` (one row per instance) and `timing.json`. The
first two depend only on the configuration and seeds; wall-clock time lives
in the timing file alone.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from sinaispectra import __version__
from sinaispectra.domain.constants import REPORT_SCHEMA_VERSION
from sinaispectra.domain.models import SuiteReport

logger = logging.getLogger(__name__)


def report_document(report: SuiteReport) -> Dict[str, Any]:
    document = report.to_dict()
    document["schema_version"] = REPORT_SCHEMA_VERSION
    document["library_version"] = __version__
    return _plain(document)


def render_json(report: SuiteReport) -> str:
    return json.dumps(report_document(report), indent=2, sort_keys=True, allow_nan=True) + "\n"


def render_csv(rows: List[Dict[str, Any]]) -> str:
    """CSV of flat per-instance rows; nested values are JSON-encoded."""
    columns = sorted({key for row in rows for key in row})
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        plain = _plain(row)
        writer.writerow({
            key: json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else value
            for key, value in plain.items()
        })
    return buffer.getvalue()


def write_report(report: SuiteReport, output_dir: Path) -> Dict[str, Path]:
    """Write the JSON, CSV and timing files of a suite run

    Args:
        report: Completed suite report
        output_dir: Directory to write into (created when missing)

    Returns:
        Mapping of "json", "csv" and "timing" to the written files
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": output_dir / f"{report.suite}.json",
        "csv": output_dir / f"{report.suite}.csv",
        "timing": output_dir / "timing.json",
    }
    paths["json"].write_text(render_json(report))
    paths["csv"].write_text(render_csv(report.instances))
    timing = {"suite": report.suite, "wall_clock_seconds": report.wall_clock_seconds}
    paths["timing"].write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")
    logger.debug("Wrote %s", ", ".join(str(p) for p in paths.values()))
    return paths


def _plain(value: Any) -> Any:
    """Convert numpy scalars and arrays, tuples and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value
