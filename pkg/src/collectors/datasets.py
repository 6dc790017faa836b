"""
RnnHlsProfiler - Dataset Loader
Labelled sequence datasets as CSV (label, t0_f0, t0_f1, ...) or JSON
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union
import csv
import json
import logging
import math
import re

import numpy as np

from ..models import Dataset
from ..core.errors import DatasetError

SCHEMA_VERSION = 1

_COLUMN_RE = re.compile(r'^t(\d+)_f(\d+)$')


def column_names(seq_len: int, input_dim: int) -> List[str]:
    """Header of the CSV format: label then the row-major flattened sequence"""
    return ['label'] + [f"t{t}_f{f}" for t in range(seq_len) for f in range(input_dim)]


def _shape_from_header(header: List[str]) -> Tuple[int, int]:
    if not header or header[0].strip().lower() != 'label':
        raise DatasetError("first column must be 'label'", row=0)
    positions = []
    for name in header[1:]:
        match = _COLUMN_RE.match(name.strip())
        if not match:
            raise DatasetError(f"unexpected column '{name}'", row=0)
        positions.append((int(match.group(1)), int(match.group(2))))
    if not positions:
        raise DatasetError("no sequence columns", row=0)
    seq_len = max(t for t, _ in positions) + 1
    input_dim = max(f for _, f in positions) + 1
    if [n.strip() for n in header] != column_names(seq_len, input_dim):
        raise DatasetError("sequence columns must be complete and in row-major order", row=0)
    return seq_len, input_dim


def _parse_label(text: Any, row: int) -> int:
    if isinstance(text, bool):
        raise DatasetError(f"label '{text}' is not a class index", row=row)
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise DatasetError(f"label '{text}' is not a number", row=row)
    if not math.isfinite(value) or value != int(value) or value < 0:
        raise DatasetError(f"label '{text}' is not a class index", row=row)
    return int(value)


def _read_csv(path: Path) -> Tuple[List[str], List[List[str]]]:
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            records = list(csv.reader(f))
    except UnicodeDecodeError as e:
        raise DatasetError(f"{path} is not UTF-8 text ({e})")
    except csv.Error as e:
        raise DatasetError(f"cannot parse {path}: {e}")
    if not records:
        raise DatasetError(f"{path} is empty")
    return records[0], records[1:]


def load_csv_dataset(path: Union[str, Path]) -> Dataset:
    path = Path(path)
    labels: List[int] = []
    rows: List[List[float]] = []
    header, records = _read_csv(path)
    seq_len, input_dim = _shape_from_header(header)
    for index, record in enumerate(records, start=1):
        if not record:
            continue
        if len(record) != len(header):
            raise DatasetError(f"expected {len(header)} fields, got {len(record)}", row=index)
        labels.append(_parse_label(record[0], index))
        try:
            values = [float(v) for v in record[1:]]
        except ValueError as e:
            raise DatasetError(f"non-numeric value ({e})", row=index)
        if not all(np.isfinite(values)):
            raise DatasetError("non-finite value", row=index)
        rows.append(values)

    x = np.asarray(rows, dtype=np.float64).reshape(len(rows), seq_len, input_dim)
    return Dataset(x=x, labels=np.asarray(labels, dtype=np.int64), name=path.stem)


def load_json_dataset(path: Union[str, Path]) -> Dataset:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise DatasetError(f"cannot parse {path}: {e}")
    if not isinstance(data, dict) or 'x' not in data or 'labels' not in data:
        raise DatasetError(f"{path}: expected an object with 'x' and 'labels'")
    if not isinstance(data['labels'], list) or not isinstance(data['x'], list):
        raise DatasetError(f"{path}: 'x' and 'labels' must be arrays")

    labels = [_parse_label(v, i + 1) for i, v in enumerate(data['labels'])]
    sequences = data['x']
    if len(sequences) != len(labels):
        raise DatasetError(f"{len(sequences)} sequences for {len(labels)} labels")
    shape: Optional[Tuple[int, ...]] = None
    for index, seq in enumerate(sequences, start=1):
        try:
            arr = np.asarray(seq, dtype=np.float64)
        except (TypeError, ValueError):
            raise DatasetError("ragged or non-numeric sequence", row=index)
        if arr.ndim != 2:
            raise DatasetError("sequence must be a [seq_len x input_dim] array", row=index)
        if shape is not None and arr.shape != shape:
            raise DatasetError(f"sequence shape {arr.shape} differs from {shape}", row=index)
        if not np.all(np.isfinite(arr)):
            raise DatasetError("non-finite value", row=index)
        shape = arr.shape
    x = np.asarray(sequences, dtype=np.float64) if sequences else np.zeros((0, 0, 0))
    return Dataset(x=x, labels=np.asarray(labels, dtype=np.int64),
                   name=str(data.get('name', path.stem)))


def load_dataset(path: Union[str, Path]) -> Dataset:
    """
    Load a dataset by file extension (.csv or .json).

    Raises:
        FileNotFoundError: file does not exist
        DatasetError: malformed content, with the offending row where known
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    if path.suffix.lower() == '.json':
        dataset = load_json_dataset(path)
    else:
        dataset = load_csv_dataset(path)
    logging.info(f"Loaded dataset '{dataset.name}' from {path} ({len(dataset)} rows)")
    return dataset


def save_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Write a dataset; the extension selects CSV or JSON"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, seq_len, input_dim = dataset.x.shape
    if path.suffix.lower() == '.json':
        doc: Dict[str, Any] = {
            'schema_version': SCHEMA_VERSION,
            'name': dataset.name,
            'labels': [int(v) for v in dataset.labels],
            'x': dataset.x.tolist(),
        }
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(doc, f)
            f.write('\n')
    else:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(column_names(seq_len, input_dim))
            for label, seq in zip(dataset.labels, dataset.x.reshape(n, -1)):
                writer.writerow([int(label)] + [repr(float(v)) for v in seq])
    logging.info(f"Saved dataset '{dataset.name}' to {path} ({n} rows)")
    return path


__all__ = [
    'SCHEMA_VERSION',
    'column_names',
    'load_csv_dataset',
    'load_json_dataset',
    'load_dataset',
    'save_dataset',
]
