"""
RnnHlsProfiler - Recurrent Network HLS Profiler
Core data models for networks, hardware configurations and estimates
"""

from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional, Any, Tuple
from enum import Enum

import numpy as np

from ..core.errors import ConfigError, DatasetError, DimensionError


class LayerKind(Enum):
    """Kinds of layers a network may contain"""
    LSTM = "lstm"
    GRU = "gru"
    DENSE = "dense"
    RELU = "relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    SOFTMAX = "softmax"

    @property
    def is_recurrent(self) -> bool:
        return self in (LayerKind.LSTM, LayerKind.GRU)

    @property
    def is_activation(self) -> bool:
        return self in (LayerKind.RELU, LayerKind.SIGMOID, LayerKind.TANH, LayerKind.SOFTMAX)

    @property
    def gate_count(self) -> int:
        """Number of packed weight blocks (Keras order: LSTM i,f,c,o; GRU z,r,h)"""
        return {LayerKind.LSTM: 4, LayerKind.GRU: 3}.get(self, 1)


class RnnMode(Enum):
    """Sequence execution schedule of the recurrent block"""
    STATIC = "static"
    NON_STATIC = "non_static"

    @classmethod
    def parse(cls, text: Any) -> 'RnnMode':
        if isinstance(text, RnnMode):
            return text
        return cls(str(text).strip().lower().replace('-', '_'))


class Strategy(Enum):
    """Synthesis optimization target"""
    LATENCY = "latency"
    RESOURCE = "resource"

    @classmethod
    def parse(cls, text: Any) -> 'Strategy':
        if isinstance(text, Strategy):
            return text
        return cls(str(text).strip().lower())


@dataclass(frozen=True)
class LayerSpec:
    """Shape and options of one layer"""
    kind: LayerKind
    input_dim: int
    output_dim: int  # hidden units n_h for recurrent kinds
    seq_len: Optional[int] = None  # recurrent kinds only
    return_sequences: bool = False
    reset_after: bool = True  # gru only
    name: str = ""

    @property
    def gates(self) -> int:
        return self.kind.gate_count

    @property
    def units(self) -> int:
        return self.output_dim


@dataclass(eq=False)
class RecurrentWeights:
    """
    Packed LSTM/GRU weights in Keras layout.

    kernel is [input_dim x G*n_h], recurrent_kernel is [n_h x G*n_h] and bias
    is [G*n_h], or [2*G*n_h] for a GRU with reset_after (input biases first,
    then recurrent biases).
    """
    kernel: np.ndarray
    recurrent_kernel: np.ndarray
    bias: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RecurrentWeights):
            return NotImplemented
        return (np.array_equal(self.kernel, other.kernel)
                and np.array_equal(self.recurrent_kernel, other.recurrent_kernel)
                and np.array_equal(self.bias, other.bias))


@dataclass(eq=False)
class DenseWeights:
    """Dense layer weights: kernel [input_dim x output_dim], bias [output_dim]"""
    kernel: np.ndarray
    bias: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseWeights):
            return NotImplemented
        return np.array_equal(self.kernel, other.kernel) and np.array_equal(self.bias, other.bias)


@dataclass
class Layer:
    """A layer spec together with its weights (None for activations)"""
    spec: LayerSpec
    weights: Any = None  # RecurrentWeights | DenseWeights | None

    @property
    def kind(self) -> LayerKind:
        return self.spec.kind


@dataclass
class NetworkModel:
    """Ordered layer graph: at most one recurrent layer followed by a dense head"""
    name: str
    layers: List[Layer] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def recurrent_layer(self) -> Optional[Layer]:
        for layer in self.layers:
            if layer.kind.is_recurrent:
                return layer
        return None

    @property
    def head_layers(self) -> List[Layer]:
        """Layers after the recurrent layer (all layers if there is none)"""
        for index, layer in enumerate(self.layers):
            if layer.kind.is_recurrent:
                return self.layers[index + 1:]
        return list(self.layers)

    @property
    def seq_len(self) -> int:
        rnn = self.recurrent_layer
        return rnn.spec.seq_len if rnn else 1

    @property
    def input_dim(self) -> int:
        return self.layers[0].spec.input_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].spec.output_dim

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NetworkModel):
            return NotImplemented
        if self.name != other.name or len(self.layers) != len(other.layers):
            return False
        return all(a.spec == b.spec and a.weights == b.weights
                   for a, b in zip(self.layers, other.layers))


@dataclass(frozen=True)
class DeviceBudget:
    """Resource budget of a target FPGA part"""
    name: str
    dsp: int
    ff: int
    lut: int
    bram: int

    def to_dict(self) -> Dict[str, Any]:
        return {'dsp': self.dsp, 'ff': self.ff, 'lut': self.lut, 'bram': self.bram}

    @classmethod
    def from_dict(cls, name: str, data: Dict[str, Any]) -> 'DeviceBudget':
        return cls(name=name, dsp=int(data['dsp']), ff=int(data['ff']),
                   lut=int(data['lut']), bram=int(data['bram']))


@dataclass(frozen=True)
class HardwareConfig:
    """Reuse pair, strategy, schedule and target of one synthesis point"""
    reuse: Tuple[int, int] = (1, 1)  # (X kernel, Y recurrent kernel)
    strategy: Strategy = Strategy.RESOURCE
    mode: RnnMode = RnnMode.STATIC
    clock_mhz: float = 200.0
    dsp_input_width: int = 18
    device: Optional[DeviceBudget] = None

    def __post_init__(self):
        x, y = self.reuse
        if int(x) < 1 or int(y) < 1:
            raise ConfigError(f"reuse factors must be >= 1, got ({x},{y})")
        if not self.clock_mhz > 0:
            raise ConfigError(f"clock must be positive, got {self.clock_mhz}")
        if self.dsp_input_width < 1:
            raise ConfigError(f"DSP input width must be >= 1, got {self.dsp_input_width}")

    @property
    def kernel_reuse(self) -> int:
        return int(self.reuse[0])

    @property
    def recurrent_reuse(self) -> int:
        return int(self.reuse[1])

    @property
    def clock_hz(self) -> float:
        return self.clock_mhz * 1e6


@dataclass
class LayerCost:
    """Per-layer contribution to a resource estimate"""
    name: str
    kind: str
    dsp: int = 0
    ff: float = 0.0
    lut: float = 0.0
    bram: int = 0
    weight_bits: int = 0
    latency_cycles: int = 0
    ff_fixed: float = 0.0  # part of ff that does not scale with reuse
    lut_fixed: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name, 'kind': self.kind, 'dsp': self.dsp,
            'ff': round(self.ff, 3), 'lut': round(self.lut, 3), 'bram': self.bram,
            'weight_bits': self.weight_bits, 'latency_cycles': self.latency_cycles,
        }


@dataclass
class BudgetReport:
    """Per-resource comparison of an estimate against a device budget"""
    device: str
    fits: Dict[str, bool] = field(default_factory=dict)
    utilization: Dict[str, float] = field(default_factory=dict)

    @property
    def fits_all(self) -> bool:
        return all(self.fits.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'device': self.device,
            'fits': dict(self.fits),
            'utilization': {k: round(v, 6) for k, v in self.utilization.items()},
            'fits_all': self.fits_all,
        }


@dataclass
class PerfEstimate:
    """Predicted resources, latency, II and throughput of one design point"""
    dsp: int
    ff: int
    lut: int
    bram: int
    latency_cycles_min: int
    latency_cycles_max: int
    ii_cycles: int
    clock_mhz: float
    latency_us_min: float = 0.0
    latency_us_max: float = 0.0
    throughput_hz: float = 0.0
    step_cycles: int = 0
    head_cycles: int = 0
    fits_device: Dict[str, bool] = field(default_factory=dict)
    layers: List[LayerCost] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        period_us = 1.0 / self.clock_mhz
        self.latency_us_min = self.latency_cycles_min * period_us
        self.latency_us_max = self.latency_cycles_max * period_us
        self.throughput_hz = self.clock_mhz * 1e6 / self.ii_cycles

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dsp': self.dsp, 'ff': self.ff, 'lut': self.lut, 'bram': self.bram,
            'latency_cycles_min': self.latency_cycles_min,
            'latency_cycles_max': self.latency_cycles_max,
            'latency_us_min': round(self.latency_us_min, 6),
            'latency_us_max': round(self.latency_us_max, 6),
            'ii_cycles': self.ii_cycles,
            'throughput_hz': round(self.throughput_hz, 6),
            'clock_mhz': self.clock_mhz,
            'step_cycles': self.step_cycles,
            'head_cycles': self.head_cycles,
            'fits_device': dict(self.fits_device),
            'layers': [layer.to_dict() for layer in self.layers],
            'warnings': list(self.warnings),
        }


@dataclass
class Dataset:
    """Labelled sequences: x is [n x seq_len x input_dim], labels [n]"""
    x: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0


@dataclass
class ScoredDataset:
    """Model scores [n x k] together with class-index labels [n]"""
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim == 1:
            scores = scores[:, None]
        labels = np.asarray(self.labels).ravel()
        if scores.ndim != 2 or scores.shape[0] != labels.size:
            raise DimensionError(f"{scores.shape[0]} score rows for {labels.size} labels")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise DatasetError("labels must be class indices")
        labels = labels.astype(np.int64)
        k = 2 if scores.shape[1] == 1 else scores.shape[1]
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise DatasetError(f"labels must lie in [0, {k})")
        self.scores = scores
        self.labels = labels

    @property
    def num_classes(self) -> int:
        """Score columns; a single column is a binary classifier"""
        return 2 if self.scores.shape[1] == 1 else int(self.scores.shape[1])


@dataclass
class SweepReport:
    """Tabular sweep output ready for CSV/JSON emission"""
    kind: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    created: datetime = field(default_factory=datetime.now)

    def sort_rows(self, keys: List[str]):
        """Sort rows canonically so worker scheduling never changes output"""
        self.rows.sort(key=lambda row: tuple(_sort_key(row.get(k)) for k in keys))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'columns': list(self.columns),
            'rows': [dict(row) for row in self.rows],
            'metadata': dict(self.metadata),
        }


def _sort_key(value: Any) -> Tuple[int, Any]:
    if value is None:
        return (0, 0)
    if isinstance(value, (int, float)):
        return (1, value)
    return (2, str(value))


__all__ = [
    'LayerKind',
    'RnnMode',
    'Strategy',
    'LayerSpec',
    'RecurrentWeights',
    'DenseWeights',
    'Layer',
    'NetworkModel',
    'DeviceBudget',
    'HardwareConfig',
    'LayerCost',
    'BudgetReport',
    'PerfEstimate',
    'Dataset',
    'ScoredDataset',
    'SweepReport',
]
