"""
RnnHlsProfiler - Report Writers
Versioned CSV sweep tables and JSON summaries, plot-ready without any
plotting dependency
"""

from typing import Any, Dict, List, Optional, Union
from pathlib import Path
from datetime import datetime
import csv
import json
import logging
import math

import numpy as np

from ..models import SweepReport

CSV_SCHEMA_VERSION = 1
JSON_SCHEMA_VERSION = 1


def _cell(value: Any) -> Any:
    """Render one CSV cell: floats exactly, booleans and tuples readably"""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else str(value)
    if isinstance(value, (tuple, list)):
        return ':'.join(str(v) for v in value)
    if value is None:
        return ''
    return value


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, datetime):
        return value.isoformat()
    if hasattr(value, 'to_dict'):
        return _jsonable(value.to_dict())
    if hasattr(value, 'value') and not isinstance(value, (str, int)):
        return value.value
    return value


class ReportWriter:
    """
    Writes sweep reports and single-shot summaries.

    Every CSV starts with a ``schema`` column carrying the CSV schema
    version; every JSON document carries ``schema_version``.
    """

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        self.output_dir = Path(output_dir) if output_dir else Path.cwd()

    def default_path(self, kind: str, suffix: str) -> Path:
        return self.output_dir / f"rnnhls_{kind}{suffix}"

    def write_csv(self, report: SweepReport, output_path: Optional[Union[str, Path]] = None) -> Path:
        """
        Write a sweep table; the header row is always present.

        Args:
            report: SweepReport with columns and rows
            output_path: Target file (default: rnnhls_<kind>.csv in output_dir)

        Returns:
            Path of the written file
        """
        output_file = Path(output_path) if output_path else self.default_path(report.kind, '.csv')
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['schema'] + list(report.columns))
            for row in report.rows:
                writer.writerow([CSV_SCHEMA_VERSION] + [_cell(row.get(c)) for c in report.columns])
        logging.info(f"Wrote {report.kind} table ({len(report.rows)} rows) to {output_file}")
        return output_file

    def write_json(self, kind: str, payload: Dict[str, Any],
                   output_path: Optional[Union[str, Path]] = None) -> Path:
        """Write a single-shot summary document"""
        output_file = Path(output_path) if output_path else self.default_path(kind, '.json')
        output_file.parent.mkdir(parents=True, exist_ok=True)
        document = {
            'schema_version': JSON_SCHEMA_VERSION,
            'kind': kind,
        }
        document.update(_jsonable(payload))
        with open(output_file, 'w', encoding='utf-8') as f:
            json.dump(document, f, indent=2)
            f.write('\n')
        logging.info(f"Wrote {kind} summary to {output_file}")
        return output_file

    def write_sweep_json(self, report: SweepReport,
                         output_path: Optional[Union[str, Path]] = None) -> Path:
        return self.write_json(report.kind, report.to_dict(), output_path)


def scores_report(scores: np.ndarray, labels: np.ndarray) -> SweepReport:
    """Per-row scores table: row, label, score_0 .. score_{k-1}"""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores[:, None]
    columns = ['row', 'label'] + [f"score_{c}" for c in range(scores.shape[1])]
    report = SweepReport(kind='scores', columns=columns)
    for index, (label, row) in enumerate(zip(labels, scores)):
        entry: Dict[str, Any] = {'row': index, 'label': int(label)}
        entry.update({f"score_{c}": float(v) for c, v in enumerate(row)})
        report.rows.append(entry)
    return report


def read_csv_report(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Read a written table back as a list of string dictionaries"""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


__all__ = [
    'CSV_SCHEMA_VERSION',
    'JSON_SCHEMA_VERSION',
    'ReportWriter',
    'scores_report',
    'read_csv_report',
]
