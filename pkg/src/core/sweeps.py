"""
RnnHlsProfiler - Sweep Drivers
Quantization sweeps (AUC ratio against the float model), reuse/width
resource scans and static versus non-static comparison
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple
import logging
import os
import re

import numpy as np
import psutil

from ..models import (
    NetworkModel, Dataset, ScoredDataset, SweepReport, HardwareConfig, RnnMode
)
from .fxp import FxpFormat, MAX_TOTAL_BITS
from .engine import EngineConfig, InferenceEngine
from .metrics import one_vs_rest_auc, accuracy
from .perf import Calibration, estimate, throughput_speedup
from .fixtures import SplitMix64
from .errors import ConfigError, MetricError

DEFAULT_INTEGER_BITS = (6, 8, 10, 12)

ProgressCallback = Callable[[int, int, str], None]

_REUSE_RE = re.compile(r'^\s*\(?\s*(\d+)\s*(?:[:,x]\s*(\d+))?\s*\)?\s*$')
_RANGE_RE = re.compile(r'^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$')


def default_workers() -> int:
    """Physical cores when known, else logical cores"""
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1


def parse_reuse(text: Any) -> Tuple[int, int]:
    """
    Parse a reuse pair: ``X:Y``, ``(X,Y)`` or a single ``R`` used for both.
    """
    if isinstance(text, (tuple, list)) and len(text) == 2:
        x, y = int(text[0]), int(text[1])
    else:
        match = _REUSE_RE.match(str(text))
        if not match:
            raise ConfigError(f"invalid reuse pair '{text}' (expected X:Y)")
        x = int(match.group(1))
        y = int(match.group(2)) if match.group(2) else x
    if x < 1 or y < 1:
        raise ConfigError(f"reuse factors must be >= 1, got {x}:{y}")
    return x, y


def parse_int_list(text: Any) -> List[int]:
    """
    Integers from ``a..b`` (inclusive, empty when b < a), a comma list, or
    a sequence.
    """
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    if isinstance(text, int):
        return [text]
    text = str(text).strip()
    if not text:
        return []
    values: List[int] = []
    for part in text.split(','):
        match = _RANGE_RE.match(part)
        try:
            if match:
                lo, hi = int(match.group(1)), int(match.group(2))
                values.extend(range(lo, hi + 1))
            elif part.strip():
                values.append(int(part))
        except ValueError:
            raise ConfigError(f"invalid integer list '{text}'")
    return values


def _run_points(fn: Callable[[Any], Dict[str, Any]], points: Sequence[Any], workers: int,
                progress: Optional[ProgressCallback], label: str) -> List[Dict[str, Any]]:
    rows: List[Dict[str, Any]] = []
    total = len(points)
    if workers <= 1 or total <= 1:
        for done, point in enumerate(points, start=1):
            rows.append(fn(point))
            if progress:
                progress(done, total, label)
        return rows
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for done, row in enumerate(pool.map(fn, points), start=1):
            rows.append(row)
            if progress:
                progress(done, total, label)
    return rows


def _auc_columns(k: int) -> List[str]:
    if k == 1:
        return ['auc_ratio', 'auc']
    return [f"auc_ratio_{c}" for c in range(k)] + [f"auc_{c}" for c in range(k)]


def sweep_quant(model: NetworkModel, dataset: Dataset,
                integer_bits: Iterable[int] = DEFAULT_INTEGER_BITS,
                frac_bits: Iterable[int] = range(2, 17),
                base: Optional[EngineConfig] = None, workers: int = 1,
                progress: Optional[ProgressCallback] = None) -> SweepReport:
    """
    AUC ratio of the quantized model over the float model at every (I, F).

    The float reference pass and its AUCs are computed once; each point
    builds its own engine at fixed<I+F, I>.
    """
    base = base or EngineConfig()
    reference_scores = InferenceEngine(model, base).run_float(dataset)
    reference = ScoredDataset(reference_scores, dataset.labels)
    reference_auc = one_vs_rest_auc(reference)
    if np.any(reference_auc == 0.0):
        raise MetricError("reference AUC is zero")
    k = len(reference_auc)
    logging.info(f"Reference AUC: {', '.join(f'{v:.4f}' for v in reference_auc)}")

    points = []
    for i_bits in integer_bits:
        for f_bits in frac_bits:
            if i_bits + f_bits > MAX_TOTAL_BITS or i_bits + f_bits < 1 or f_bits < 0:
                raise ConfigError(f"fixed<{i_bits + f_bits},{i_bits}> is not a valid precision")
            points.append((int(i_bits), int(f_bits)))

    def run_point(point: Tuple[int, int]) -> Dict[str, Any]:
        i_bits, f_bits = point
        fmt = FxpFormat.fixed(i_bits + f_bits, i_bits)
        scores = InferenceEngine(model, base.with_precision(fmt)).run_batch(dataset)
        quantized = ScoredDataset(scores, dataset.labels)
        aucs = one_vs_rest_auc(quantized)
        ratios = aucs / reference_auc
        row: Dict[str, Any] = {'integer_bits': i_bits, 'frac_bits': f_bits,
                               'total_bits': i_bits + f_bits, 'precision': str(fmt),
                               'accuracy': accuracy(quantized)}
        names = _auc_columns(k)
        row.update(zip(names[:k], (float(v) for v in ratios)))
        row.update(zip(names[k:], (float(v) for v in aucs)))
        logging.debug(f"sweep-quant {fmt}: ratio {', '.join(f'{v:.5f}' for v in ratios)}")
        return row

    report = SweepReport(
        kind='sweep_quant',
        columns=['integer_bits', 'frac_bits', 'total_bits', 'precision']
        + _auc_columns(k) + ['accuracy'],
        metadata={
            'model': model.name,
            'dataset': dataset.name,
            'samples': len(dataset),
            'reference_auc': [float(v) for v in reference_auc],
            'rounding': base.policy.rounding.value,
            'overflow': base.policy.overflow.value,
            'activation_mode': base.activation_mode.value,
        },
    )
    report.rows = _run_points(run_point, points, workers, progress, 'sweep-quant')
    report.sort_rows(['integer_bits', 'frac_bits'])
    return report


RESOURCE_COLUMNS = [
    'reuse', 'reuse_x', 'reuse_y', 'total_bits', 'strategy', 'mode',
    'dsp', 'ff', 'lut', 'bram', 'latency_cycles_min', 'latency_cycles_max',
    'latency_us_min', 'latency_us_max', 'ii_cycles', 'throughput_hz',
    'fits', 'fits_dsp', 'fits_ff', 'fits_lut', 'fits_bram',
]


def estimate_row(model: NetworkModel, hw: HardwareConfig, precision: FxpFormat,
                 calibration: Optional[Calibration] = None,
                 vivado_correction: bool = False) -> Dict[str, Any]:
    """One flat table row for an estimate"""
    est = estimate(model, hw, precision, calibration, vivado_correction)
    row: Dict[str, Any] = {
        'reuse': f"{hw.kernel_reuse}:{hw.recurrent_reuse}",
        'reuse_x': hw.kernel_reuse,
        'reuse_y': hw.recurrent_reuse,
        'total_bits': precision.total_bits,
        'strategy': hw.strategy.value,
        'mode': hw.mode.value,
        'dsp': est.dsp, 'ff': est.ff, 'lut': est.lut, 'bram': est.bram,
        'latency_cycles_min': est.latency_cycles_min,
        'latency_cycles_max': est.latency_cycles_max,
        'latency_us_min': est.latency_us_min,
        'latency_us_max': est.latency_us_max,
        'ii_cycles': est.ii_cycles,
        'throughput_hz': est.throughput_hz,
    }
    if est.fits_device:
        row['fits'] = all(est.fits_device.values())
        row.update({f"fits_{r}": ok for r, ok in est.fits_device.items()})
    return row


def sweep_reuse(model: NetworkModel, reuse_list: Sequence[Any], widths: Iterable[int],
                hw: Optional[HardwareConfig] = None, integer_bits: int = 6,
                calibration: Optional[Calibration] = None, vivado_correction: bool = False,
                progress: Optional[ProgressCallback] = None) -> SweepReport:
    """Cross product of reuse pairs and total widths through the estimator"""
    hw = hw or HardwareConfig()
    pairs = [parse_reuse(r) for r in reuse_list]
    points = [(pair, int(w)) for pair in pairs for w in widths]

    def run_point(point: Tuple[Tuple[int, int], int]) -> Dict[str, Any]:
        pair, width = point
        fmt = FxpFormat.fixed(width, min(integer_bits, width))
        return estimate_row(model, replace(hw, reuse=pair), fmt, calibration, vivado_correction)

    report = SweepReport(
        kind='sweep_reuse',
        columns=list(RESOURCE_COLUMNS),
        metadata={
            'model': model.name,
            'device': hw.device.name if hw.device else None,
            'clock_mhz': hw.clock_mhz,
            'vivado_correction': vivado_correction,
        },
    )
    report.rows = _run_points(run_point, points, 1, progress, 'sweep-reuse')
    report.sort_rows(['reuse_x', 'reuse_y', 'total_bits'])
    return report


def check_inputs(model: NetworkModel, rows: int = 4, seed: int = 7) -> np.ndarray:
    """Deterministic near-normal batch shaped for the model"""
    rng = SplitMix64(seed)
    return rng.normal((rows, model.seq_len, model.input_dim))


def compare_modes(model: NetworkModel, precision: FxpFormat,
                  hw: Optional[HardwareConfig] = None,
                  calibration: Optional[Calibration] = None,
                  base: Optional[EngineConfig] = None,
                  inputs: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """
    Static and non-static estimates side by side, plus a check that both
    schedules produce identical engine outputs on a fixed input batch.
    """
    hw = hw or HardwareConfig()
    base = (base or EngineConfig()).with_precision(precision)
    static = estimate(model, replace(hw, mode=RnnMode.STATIC), precision, calibration)
    non_static = estimate(model, replace(hw, mode=RnnMode.NON_STATIC), precision, calibration)

    x = inputs if inputs is not None else check_inputs(model)
    out_static = InferenceEngine(model, base.with_mode(RnnMode.STATIC)).run_raw(x)
    out_non_static = InferenceEngine(model, base.with_mode(RnnMode.NON_STATIC)).run_raw(x)
    identical = bool(np.array_equal(out_static, out_non_static))
    if not identical:
        logging.error("Static and non-static engine outputs differ on the check batch")

    return {
        'model': model.name,
        'precision': str(precision),
        'reuse': f"{hw.kernel_reuse}:{hw.recurrent_reuse}",
        'strategy': hw.strategy.value,
        'seq_len': model.seq_len,
        'static': static,
        'non_static': non_static,
        'throughput_speedup': throughput_speedup(static, non_static),
        'outputs_identical': identical,
    }


__all__ = [
    'DEFAULT_INTEGER_BITS',
    'RESOURCE_COLUMNS',
    'default_workers',
    'parse_reuse',
    'parse_int_list',
    'sweep_quant',
    'estimate_row',
    'sweep_reuse',
    'check_inputs',
    'compare_modes',
]
