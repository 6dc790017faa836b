"""
RnnHlsProfiler - Benchmark Fixtures
Deterministic benchmark-shaped networks, synthetic sequence datasets and
analytically constructed surrogate models
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from ..models import (
    NetworkModel, Layer, LayerSpec, LayerKind, RecurrentWeights, DenseWeights, Dataset
)
from .analysis import validate_model
from .errors import FixtureError
from ..collectors.weights import load_model, save_model
from ..collectors.datasets import save_dataset

DEFAULT_SEED = 20210

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """
    Outputs ``offset .. offset+count-1`` of the SplitMix64 stream for ``seed``.

    Output i is mix(seed + (i + 1) * 0x9E3779B97F4A7C15) in 64-bit unsigned
    arithmetic, so any slice can be generated independently.
    Doubles take the top 53 bits of an output. Dataset noise sums twelve of
    those mantissas as integers (see ``SplitMix64.normal``), so no
    transcendental function touches the generated data.
    """
    counters = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    z = np.uint64(int(seed) & _MASK64) + counters * _GOLDEN_GAMMA
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Stateful view over the splitmix64 stream"""

    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = int(seed) & _MASK64
        self.position = 0

    def next_u64(self, count: int) -> np.ndarray:
        out = splitmix64(self.seed, count, self.position)
        self.position += count
        return out

    def uniform(self, size: Union[int, Tuple[int, ...]]) -> np.ndarray:
        """Doubles in [0, 1) from the top 53 bits"""
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        top = (self.next_u64(n) >> np.uint64(11)).astype(np.float64)
        return np.ldexp(top, -53).reshape(shape)

    def integers(self, high: int, size: int) -> np.ndarray:
        return (self.next_u64(size) % np.uint64(high)).astype(np.int64)

    def normal(self, size: Union[int, Tuple[int, ...]]) -> np.ndarray:
        """
        Approximate standard normals: the sum of twelve 53-bit uniforms minus 6.

        The twelve mantissas are added as unsigned integers (exact, below 2**57)
        and converted once, so the result is the same on every platform. Values
        lie in [-6, 6) with mean 0 and variance 1.
        """
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        draws = self.next_u64(12 * n).reshape(n, 12) >> np.uint64(11)
        total = np.zeros(n, dtype=np.uint64)
        for k in range(12):
            total += draws[:, k]
        return (total.astype(np.float64) * 2.0 ** -53 - 6.0).reshape(shape)


@dataclass(frozen=True)
class Benchmark:
    """Architecture and synthesis points of one reference workload"""
    name: str
    seq_len: int
    input_dim: int
    hidden: int
    dense: Tuple[int, ...]
    output_dim: int
    task: str
    device: str
    reuse_points: Tuple[Tuple[int, int], ...]
    lstm_reuse_points: Tuple[Tuple[int, int], ...]

    @property
    def output_activation(self) -> LayerKind:
        return LayerKind.SIGMOID if self.output_dim == 1 else LayerKind.SOFTMAX

    def reuse_for(self, cell: LayerKind) -> Tuple[Tuple[int, int], ...]:
        return self.lstm_reuse_points if cell is LayerKind.LSTM else self.reuse_points


BENCHMARKS: Dict[str, Benchmark] = {
    'top_tagging': Benchmark(
        name='top_tagging', seq_len=20, input_dim=6, hidden=20, dense=(64,), output_dim=1,
        task='binary_seq', device='xcku115-flvb2104-2-i',
        reuse_points=((6, 5), (12, 10), (30, 20), (60, 60)),
        lstm_reuse_points=((6, 5), (12, 10), (30, 20), (60, 40)),
    ),
    'flavor_tagging': Benchmark(
        name='flavor_tagging', seq_len=15, input_dim=6, hidden=120, dense=(50, 10), output_dim=3,
        task='multiclass_seq', device='xcku115-flvb2104-2-i',
        reuse_points=((48, 40), (90, 60), (120, 120), (240, 240)),
        lstm_reuse_points=((48, 40), (90, 60), (120, 120), (240, 240)),
    ),
    'quickdraw': Benchmark(
        name='quickdraw', seq_len=100, input_dim=3, hidden=128, dense=(256, 128), output_dim=5,
        task='multiclass_seq', device='xcu250-figd2104-2-e',
        reuse_points=((48, 32), (96, 64), (192, 128), (384, 384)),
        lstm_reuse_points=((48, 32), (96, 64), (192, 128), (384, 256)),
    ),
}

_ALIASES = {'top': 'top_tagging', 'flavor': 'flavor_tagging', 'qd': 'quickdraw'}

TASKS: Dict[str, Dict[str, int]] = {
    'binary_seq': {'seq_len': 20, 'input_dim': 6, 'num_classes': 2},
    'multiclass_seq': {'seq_len': 15, 'input_dim': 6, 'num_classes': 3},
}


def get_benchmark(name: str) -> Benchmark:
    key = str(name).strip().lower().replace('-', '_')
    key = _ALIASES.get(key, key)
    if key not in BENCHMARKS:
        raise FixtureError(f"unknown benchmark '{name}' (known: {', '.join(BENCHMARKS)})")
    return BENCHMARKS[key]


def _cell_kind(cell: Any) -> LayerKind:
    try:
        kind = LayerKind(str(getattr(cell, 'value', cell)).strip().lower())
    except ValueError:
        kind = None
    if kind is None or not kind.is_recurrent:
        raise FixtureError(f"cell must be 'lstm' or 'gru', got '{cell}'")
    return kind


def _architecture(bench: Benchmark, kind: LayerKind) -> List[LayerSpec]:
    specs = [LayerSpec(kind, bench.input_dim, bench.hidden, seq_len=bench.seq_len,
                       name=kind.value)]
    width = bench.hidden
    for index, units in enumerate(bench.dense):
        specs.append(LayerSpec(LayerKind.DENSE, width, units, name=f"dense_{index}"))
        specs.append(LayerSpec(LayerKind.RELU, units, units, name=f"relu_{index}"))
        width = units
    specs.append(LayerSpec(LayerKind.DENSE, width, bench.output_dim, name="output"))
    specs.append(LayerSpec(bench.output_activation, bench.output_dim, bench.output_dim,
                           name=bench.output_activation.value))
    return specs


def _glorot(rng: SplitMix64, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return (2.0 * rng.uniform((fan_in, fan_out)) - 1.0) * limit


def _random_weights(spec: LayerSpec, rng: SplitMix64) -> Any:
    if spec.kind.is_recurrent:
        width = spec.gates * spec.output_dim
        bias_len = 2 * width if (spec.kind is LayerKind.GRU and spec.reset_after) else width
        return RecurrentWeights(
            kernel=_glorot(rng, spec.input_dim, width),
            recurrent_kernel=_glorot(rng, spec.output_dim, width),
            bias=0.1 * (2.0 * rng.uniform(bias_len) - 1.0),
        )
    if spec.kind is LayerKind.DENSE:
        return DenseWeights(
            kernel=_glorot(rng, spec.input_dim, spec.output_dim),
            bias=0.1 * (2.0 * rng.uniform(spec.output_dim) - 1.0),
        )
    return None


def make_benchmark_shape(name: str, cell: Any, seed: int = DEFAULT_SEED,
                         weights_path: Optional[Union[str, Path]] = None) -> NetworkModel:
    """
    Network with the exact architecture of a reference workload.

    Weights are Glorot-uniform draws from splitmix64(seed) unless a weight
    file with the same architecture is supplied.
    """
    bench = get_benchmark(name)
    kind = _cell_kind(cell)
    specs = _architecture(bench, kind)

    if weights_path is not None:
        model = load_model(weights_path)
        if [l.spec for l in model.layers] != specs:
            raise FixtureError(f"{weights_path} does not match the {bench.name} {kind.value} architecture")
        return model

    rng = SplitMix64(seed)
    layers = [Layer(spec=spec, weights=_random_weights(spec, rng)) for spec in specs]
    model = NetworkModel(name=f"{bench.name}_{kind.value}", layers=layers,
                         metadata={'benchmark': bench.name, 'seed': seed, 'weights': 'random'})
    return validate_model(model)


def make_synthetic_dataset(task: str, n: int, seed: int = DEFAULT_SEED,
                           seq_len: Optional[int] = None, input_dim: Optional[int] = None,
                           num_classes: Optional[int] = None, phi: float = 0.5,
                           sigma: float = 0.5, class_shift: float = 0.2) -> Dataset:
    """
    Sequences from per-class AR(1) processes.

    Every feature of a class-c sample follows
    x_t = m_c + phi * (x_{t-1} - m_c) + sigma * e_t, started from the
    stationary distribution, with class means m_c = class_shift * (c - (k-1)/2).
    The stream comes from splitmix64(seed): labels first, then the noise in
    [n x seq_len x input_dim] row-major order.
    """
    if task not in TASKS:
        raise FixtureError(f"unknown task '{task}' (known: {', '.join(TASKS)})")
    if n < 1:
        raise FixtureError(f"dataset size must be at least 1, got {n}")
    defaults = TASKS[task]
    seq_len = seq_len or defaults['seq_len']
    input_dim = input_dim or defaults['input_dim']
    k = num_classes or defaults['num_classes']

    rng = SplitMix64(seed)
    labels = rng.integers(k, n)
    noise = rng.normal((n, seq_len, input_dim))
    means = (class_shift * (labels - (k - 1) / 2.0))[:, None]

    x = np.empty((n, seq_len, input_dim), dtype=np.float64)
    x[:, 0, :] = means + sigma / math.sqrt(1.0 - phi * phi) * noise[:, 0, :]
    for t in range(1, seq_len):
        x[:, t, :] = means + phi * (x[:, t - 1, :] - means) + sigma * noise[:, t, :]
    return Dataset(x=x, labels=labels, name=f"{task}_{seed}")


def _surrogate_recurrent(spec: LayerSpec) -> RecurrentWeights:
    n, d = spec.output_dim, spec.input_dim
    scale = 0.25 * (1.0 + 0.5 * np.arange(n) / max(n - 1, 1))
    candidate = np.tile(scale, (d, 1))
    if spec.kind is LayerKind.LSTM:
        # i, f, o saturated open: the cell state integrates tanh(candidate . x)
        kernel = np.zeros((d, 4 * n))
        kernel[:, 2 * n:3 * n] = candidate
        bias = np.concatenate([np.full(n, 6.0), np.full(n, 6.0), np.zeros(n), np.full(n, 6.0)])
        return RecurrentWeights(kernel, np.zeros((n, 4 * n)), bias)

    # z near 0.88 gives an exponential average over roughly eight steps
    kernel = np.zeros((d, 3 * n))
    kernel[:, 2 * n:] = candidate
    gates = np.concatenate([np.full(n, 2.0), np.full(n, 6.0), np.zeros(n)])
    bias = np.concatenate([gates, np.zeros(3 * n)]) if spec.reset_after else gates
    return RecurrentWeights(kernel, np.zeros((n, 3 * n)), bias)


def make_surrogate(name: str = 'top_tagging', cell: Any = LayerKind.LSTM,
                   separation: float = 4.0) -> NetworkModel:
    """
    Benchmark-shaped network with hand-built weights that separate the
    classes of the matching synthetic task.

    The recurrent layer summarizes the sequence mean in every hidden unit;
    the dense head averages it, keeps it positive through the ReLUs and maps
    it to class logits proportional to each class offset.
    """
    bench = get_benchmark(name)
    kind = _cell_kind(cell)
    specs = _architecture(bench, kind)
    k = bench.output_dim
    centered = np.arange(k) - (k - 1) / 2.0 if k > 1 else np.ones(1)

    layers = []
    offset = 0.0
    for spec in specs:
        if spec.kind.is_recurrent:
            weights: Any = _surrogate_recurrent(spec)
        elif spec.kind is LayerKind.DENSE and spec.name != 'output':
            weights = DenseWeights(np.full((spec.input_dim, spec.output_dim), 1.0 / spec.input_dim),
                                   np.ones(spec.output_dim))
            offset += 1.0
        elif spec.kind is LayerKind.DENSE:
            kernel = np.tile(separation * centered / spec.input_dim, (spec.input_dim, 1))
            bias = -separation * centered * offset
            if k > 1:
                bias = bias - 0.5 * centered ** 2
            weights = DenseWeights(kernel, bias)
        else:
            weights = None
        layers.append(Layer(spec=spec, weights=weights))

    model = NetworkModel(name=f"surrogate_{bench.name}_{kind.value}", layers=layers,
                         metadata={'benchmark': bench.name, 'weights': 'surrogate',
                                   'task': bench.task})
    return validate_model(model)


def surrogate_dataset(name: str, n: int, seed: int = DEFAULT_SEED) -> Dataset:
    """Synthetic dataset shaped for a benchmark's input"""
    bench = get_benchmark(name)
    k = max(bench.output_dim, 2)
    return make_synthetic_dataset(bench.task, n, seed, seq_len=bench.seq_len,
                                  input_dim=bench.input_dim, num_classes=k)


def write_fixtures(out_dir: Union[str, Path], seed: int = DEFAULT_SEED,
                   n_samples: int = 2000,
                   benchmarks: Optional[Sequence[str]] = None) -> List[Path]:
    """
    Write benchmark-shaped models for both cells, the surrogates and both
    synthetic datasets. Returns the written paths in a stable order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    names = [get_benchmark(b).name for b in (benchmarks or BENCHMARKS)]
    for name in names:
        for kind in (LayerKind.LSTM, LayerKind.GRU):
            model = make_benchmark_shape(name, kind, seed)
            written.append(save_model(model, out_dir / f"{model.name}.json"))
            surrogate = make_surrogate(name, kind)
            written.append(save_model(surrogate, out_dir / f"{surrogate.name}.json"))
    for task in TASKS:
        dataset = make_synthetic_dataset(task, n_samples, seed)
        written.append(save_dataset(dataset, out_dir / f"{task}.csv"))
    logging.info(f"Wrote {len(written)} fixture files to {out_dir}")
    return written


__all__ = [
    'DEFAULT_SEED',
    'splitmix64',
    'SplitMix64',
    'Benchmark',
    'BENCHMARKS',
    'TASKS',
    'get_benchmark',
    'make_benchmark_shape',
    'make_synthetic_dataset',
    'make_surrogate',
    'surrogate_dataset',
    'write_fixtures',
]
