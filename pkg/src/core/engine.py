"""
RnnHlsProfiler - Inference Engine
Bit-accurate fixed-point execution of LSTM/GRU networks with a dense head,
in static (one block iterated) or non-static (one block per timestep) order
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence
import copy
import logging

import numpy as np

from ..models import (
    NetworkModel, Layer, LayerKind, LayerSpec, RecurrentWeights, RnnMode
)
from .fxp import (
    FxpFormat, FxpValue, QuantPolicy, DEFAULT_POLICY,
    quantize_array, requantize, requantize_value, raw_dtype, to_real, from_values
)
from .activation import (
    ActivationFunction, ActivationMode, LutConfig, DEFAULT_EXP_LUT, DEFAULT_INV_LUT,
    lut_raw, direct_raw, relu_raw, softmax_raw, reference
)
from .errors import DimensionError, DatasetError

DEFAULT_PRECISION = FxpFormat.fixed(16, 6)


@dataclass(frozen=True)
class EngineConfig:
    """
    Numeric configuration of one inference run.

    One uniform precision is used for every tensor. Sigmoid and tanh tables
    default to 1024 entries over [-8, 8) with entries stored at the working
    precision; softmax tables keep their own 18-bit entry formats.
    """
    precision: FxpFormat = DEFAULT_PRECISION
    policy: QuantPolicy = DEFAULT_POLICY
    mode: RnnMode = RnnMode.STATIC
    activation_mode: ActivationMode = ActivationMode.LUT
    lut_overrides: Dict[str, LutConfig] = field(default_factory=dict, hash=False, compare=False)

    def lut(self, function: ActivationFunction) -> LutConfig:
        override = self.lut_overrides.get(function.value)
        if override is not None:
            return override
        if function is ActivationFunction.EXP:
            return DEFAULT_EXP_LUT
        if function is ActivationFunction.INV:
            return DEFAULT_INV_LUT
        return LutConfig(entry_format=self.precision)

    def with_precision(self, precision: FxpFormat) -> 'EngineConfig':
        return replace(self, precision=precision)

    def with_mode(self, mode: RnnMode) -> 'EngineConfig':
        return replace(self, mode=mode)


@dataclass(eq=False)
class CellState:
    """
    Recurrent state as raw integers at ``format``: h is [n_h] (or [batch x n_h]),
    c is the LSTM cell state of the same shape and None for a GRU.
    """
    h: np.ndarray
    c: Optional[np.ndarray]
    format: FxpFormat

    @classmethod
    def zeros(cls, n_h: int, fmt: FxpFormat, with_cell: bool = True,
              batch: Optional[int] = None, dtype: Any = np.int64) -> 'CellState':
        shape = (n_h,) if batch is None else (batch, n_h)
        h = np.zeros(shape, dtype=np.int64)
        if dtype is object:
            h = h.astype(object)
        c = h.copy() if with_cell else None
        return cls(h=h, c=c, format=fmt)

    @property
    def h_values(self) -> List[FxpValue]:
        return [FxpValue(int(v), self.format) for v in np.ravel(self.h)]

    @property
    def c_values(self) -> Optional[List[FxpValue]]:
        if self.c is None:
            return None
        return [FxpValue(int(v), self.format) for v in np.ravel(self.c)]

    @property
    def h_real(self) -> np.ndarray:
        return to_real(self.h, self.format)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CellState):
            return NotImplemented
        if self.format != other.format or (self.c is None) != (other.c is None):
            return False
        same_c = self.c is None or np.array_equal(self.c, other.c)
        return np.array_equal(self.h, other.h) and same_c


# --- Quantized arithmetic helpers ------------------------------------------

class _Arith:
    """Working-precision operations shared by every layer of one engine"""

    def __init__(self, cfg: EngineConfig, dtype: Any):
        self.cfg = cfg
        self.fmt = cfg.precision
        self.frac = cfg.precision.frac_bits
        self.policy = cfg.policy
        self.dtype = dtype

    def q(self, raw: np.ndarray, frac_bits: int) -> np.ndarray:
        return requantize(raw, frac_bits, self.fmt, self.policy)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Hadamard product of two working-format tensors"""
        return self.q(a * b, 2 * self.frac)

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.q(a + b, self.frac)

    def one_minus(self, a: np.ndarray) -> np.ndarray:
        return self.q((1 << self.frac) - a, self.frac)

    def act(self, function: ActivationFunction, raw: np.ndarray) -> np.ndarray:
        if self.cfg.activation_mode is ActivationMode.DIRECT:
            return direct_raw(function, raw, self.fmt, self.fmt, self.policy)
        lut = self.cfg.lut(function)
        entries = lut_raw(function, raw, self.frac, lut)
        return self.q(entries, lut.entry_format.frac_bits)

    def softmax(self, raw: np.ndarray) -> np.ndarray:
        if self.cfg.activation_mode is ActivationMode.DIRECT:
            x = to_real(raw, self.fmt)
            e = np.exp(x - x.max(axis=-1, keepdims=True))
            return quantize_array(e / e.sum(axis=-1, keepdims=True), self.fmt, self.policy,
                                  dtype=self.dtype)
        return softmax_raw(raw, self.fmt, self.fmt, self.cfg.lut(ActivationFunction.EXP),
                           self.cfg.lut(ActivationFunction.INV), self.policy)

    def weights(self, w: np.ndarray) -> np.ndarray:
        return quantize_array(w, self.fmt, self.policy, dtype=self.dtype)

    def bias(self, b: np.ndarray) -> np.ndarray:
        """Bias quantized to the working format, aligned to product scale 2F"""
        return self.weights(b) << self.frac


# --- Recurrent cells --------------------------------------------------------

class RecurrentCell:
    """
    Quantized LSTM or GRU cell.

    Quantization points: once after each matrix-vector accumulation, once
    after each activation, once after each Hadamard product or sum of
    products.
    """

    def __init__(self, spec: LayerSpec, weights: RecurrentWeights, arith: _Arith):
        self.spec = spec
        self.arith = arith
        self.units = spec.output_dim
        self.kernel = arith.weights(weights.kernel)
        self.recurrent = arith.weights(weights.recurrent_kernel)
        width = spec.gates * self.units
        bias = np.asarray(weights.bias, dtype=np.float64).reshape(-1)
        if spec.kind is LayerKind.GRU and spec.reset_after:
            self.bias_in = arith.bias(bias[:width])
            self.bias_rec = arith.bias(bias[width:])
        else:
            self.bias_in = arith.bias(bias)
            self.bias_rec = None

    @property
    def is_lstm(self) -> bool:
        return self.spec.kind is LayerKind.LSTM

    def initial_state(self, batch: Optional[int] = None) -> CellState:
        return CellState.zeros(self.units, self.arith.fmt, with_cell=self.is_lstm,
                               batch=batch, dtype=self.arith.dtype)

    def step(self, x_t: np.ndarray, state: CellState) -> CellState:
        if self.is_lstm:
            return self._lstm(x_t, state)
        return self._gru(x_t, state)

    def _lstm(self, x_t: np.ndarray, state: CellState) -> CellState:
        a, n = self.arith, self.units
        F = a.frac
        gates = a.q(x_t @ self.kernel + state.h @ self.recurrent + self.bias_in, 2 * F)
        i = a.act(ActivationFunction.SIGMOID, gates[..., 0:n])
        f = a.act(ActivationFunction.SIGMOID, gates[..., n:2 * n])
        g = a.act(ActivationFunction.TANH, gates[..., 2 * n:3 * n])
        o = a.act(ActivationFunction.SIGMOID, gates[..., 3 * n:4 * n])
        c = a.add(a.mul(f, state.c), a.mul(i, g))
        h = a.mul(o, a.act(ActivationFunction.TANH, c))
        return CellState(h=h, c=c, format=a.fmt)

    def _gru(self, x_t: np.ndarray, state: CellState) -> CellState:
        a, n = self.arith, self.units
        F = a.frac
        h_prev = state.h
        x_part = x_t @ self.kernel + self.bias_in
        if self.bias_rec is not None:
            h_part = h_prev @ self.recurrent + self.bias_rec
            z = a.act(ActivationFunction.SIGMOID, a.q(x_part[..., 0:n] + h_part[..., 0:n], 2 * F))
            r = a.act(ActivationFunction.SIGMOID,
                      a.q(x_part[..., n:2 * n] + h_part[..., n:2 * n], 2 * F))
            candidate = a.add(a.q(x_part[..., 2 * n:], 2 * F),
                              a.mul(r, a.q(h_part[..., 2 * n:], 2 * F)))
        else:
            h_part = h_prev @ self.recurrent[:, 0:2 * n]
            z = a.act(ActivationFunction.SIGMOID, a.q(x_part[..., 0:n] + h_part[..., 0:n], 2 * F))
            r = a.act(ActivationFunction.SIGMOID,
                      a.q(x_part[..., n:2 * n] + h_part[..., n:2 * n], 2 * F))
            reset_h = a.mul(r, h_prev)
            candidate = a.q(x_part[..., 2 * n:] + reset_h @ self.recurrent[:, 2 * n:], 2 * F)
        h_tilde = a.act(ActivationFunction.TANH, candidate)
        h = a.add(a.mul(z, h_prev), a.mul(a.one_minus(z), h_tilde))
        return CellState(h=h, c=None, format=a.fmt)


class TimestepBlock:
    """One per-timestep copy of the recurrent cell (non-static schedule)"""

    def __init__(self, cell: RecurrentCell, t: int):
        self.t = t
        self.cell = copy.copy(cell)
        self.cell.kernel = cell.kernel.copy()
        self.cell.recurrent = cell.recurrent.copy()

    def __call__(self, x_t: np.ndarray, state: CellState) -> CellState:
        return self.cell.step(x_t, state)


# --- Engine -----------------------------------------------------------------

class InferenceEngine:
    """
    Executes one NetworkModel under one EngineConfig.

    Weights are quantized once on construction. Inputs are batched over the
    leading axis: run_raw takes [batch x seq_len x input_dim] reals.
    """

    def __init__(self, model: NetworkModel, cfg: Optional[EngineConfig] = None):
        self.model = model
        self.cfg = cfg or EngineConfig()
        self.dtype = raw_dtype(self.cfg.precision, _max_fan_in(model))
        self.arith = _Arith(self.cfg, self.dtype)
        rnn = model.recurrent_layer
        self.cell = RecurrentCell(rnn.spec, rnn.weights, self.arith) if rnn else None
        self.head: List[Callable[[np.ndarray], np.ndarray]] = [
            self._build_head_layer(layer) for layer in model.head_layers
        ]
        self._blocks: Optional[List[TimestepBlock]] = None

    # -- construction

    def _build_head_layer(self, layer: Layer) -> Callable[[np.ndarray], np.ndarray]:
        a = self.arith
        kind = layer.kind
        if kind is LayerKind.DENSE:
            kernel = a.weights(layer.weights.kernel)
            bias = a.bias(layer.weights.bias)
            return lambda x: a.q(x @ kernel + bias, 2 * a.frac)
        if kind is LayerKind.RELU:
            return relu_raw
        if kind is LayerKind.SIGMOID:
            return lambda x: a.act(ActivationFunction.SIGMOID, x)
        if kind is LayerKind.TANH:
            return lambda x: a.act(ActivationFunction.TANH, x)
        if kind is LayerKind.SOFTMAX:
            return a.softmax
        raise DimensionError(f"unsupported layer kind '{kind.value}' in the head")

    @property
    def blocks(self) -> List[TimestepBlock]:
        if self._blocks is None:
            self._blocks = [TimestepBlock(self.cell, t) for t in range(self.model.seq_len)]
        return self._blocks

    # -- execution

    def quantize_inputs(self, seqs: np.ndarray) -> np.ndarray:
        return quantize_array(seqs, self.cfg.precision, self.cfg.policy, dtype=self.dtype)

    def _recurrent(self, x: np.ndarray) -> np.ndarray:
        batch = x.shape[0]
        state = self.cell.initial_state(batch)
        if self.cfg.mode is RnnMode.STATIC:
            for t in range(x.shape[1]):
                state = self.cell.step(x[:, t, :], state)
        else:
            for block, t in zip(self.blocks, range(x.shape[1])):
                state = block(x[:, t, :], state)
        return state.h

    def run_raw(self, seqs: Any) -> np.ndarray:
        """Raw outputs [batch x output_dim] for real inputs [batch x seq_len x input_dim]"""
        x = self.quantize_inputs(self._check_batch(seqs))
        if self.cell is not None:
            y = self._recurrent(x)
        else:
            y = x[:, -1, :]
        for layer in self.head:
            y = layer(y)
        return y

    def run_sequence(self, seq: Any) -> List[FxpValue]:
        """Output vector for one [seq_len x input_dim] sequence"""
        arr = np.asarray(seq, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError(f"sequence must be 2-D [seq_len x input_dim], got {arr.shape}")
        out = self.run_raw(arr[np.newaxis, ...])
        return [FxpValue(int(v), self.cfg.precision) for v in out[0]]

    def run_batch(self, data: Any, workers: int = 1) -> np.ndarray:
        """Real-valued score matrix [n x output_dim], rows in input order"""
        seqs = self._check_rows(data)
        if len(seqs) == 0:
            return np.zeros((0, self.model.output_dim), dtype=np.float64)
        if workers <= 1 or len(seqs) < 2 * workers:
            raw = self.run_raw(seqs)
        else:
            chunks = np.array_split(seqs, workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(self.run_raw, chunks))
            raw = np.concatenate(parts, axis=0)
        return to_real(raw, self.cfg.precision)

    def run_float(self, data: Any) -> np.ndarray:
        """Double-precision reference scores with exact activations"""
        seqs = self._check_rows(data)
        if len(seqs) == 0:
            return np.zeros((0, self.model.output_dim), dtype=np.float64)
        return run_float(self.model, seqs)

    # -- validation

    def _expected_shape(self) -> tuple:
        return (self.model.seq_len, self.model.input_dim)

    def _check_batch(self, seqs: Any) -> np.ndarray:
        arr = np.asarray(seqs, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[1:] != self._expected_shape():
            raise DimensionError(
                f"input must be [n x {self.model.seq_len} x {self.model.input_dim}], "
                f"got {list(arr.shape)}")
        return arr

    def _check_rows(self, data: Any) -> np.ndarray:
        """Validate rows one at a time so errors carry the row index"""
        if hasattr(data, 'x'):
            data = data.x
        if isinstance(data, np.ndarray) and data.dtype != object and data.ndim == 3:
            rows = data
        else:
            rows = list(data)
        expected = self._expected_shape()
        if isinstance(rows, np.ndarray) and rows.shape[1:] == expected:
            if rows.shape[0] == 0:
                return np.zeros((0,) + expected, dtype=np.float64)
            bad = ~np.all(np.isfinite(rows.reshape(rows.shape[0], -1)), axis=1)
            if np.any(bad):
                raise DatasetError("non-finite input", row=int(np.argmax(bad)))
            return rows.astype(np.float64, copy=False)
        checked = []
        for index, row in enumerate(rows):
            arr = np.asarray(row, dtype=np.float64)
            if arr.ndim == 1 and arr.size == expected[0] * expected[1]:
                arr = arr.reshape(expected)
            if arr.shape != expected:
                raise DatasetError(
                    f"expected shape [{expected[0]} x {expected[1]}] but got {list(arr.shape)}",
                    row=index)
            if not np.all(np.isfinite(arr)):
                raise DatasetError("non-finite input", row=index)
            checked.append(arr)
        if not checked:
            return np.zeros((0,) + expected, dtype=np.float64)
        return np.stack(checked)


def _max_fan_in(model: NetworkModel) -> int:
    fan_in = 1
    for layer in model.layers:
        spec = layer.spec
        if spec.kind.is_recurrent:
            fan_in = max(fan_in, spec.input_dim + spec.output_dim + 1)
        elif spec.kind is LayerKind.DENSE:
            fan_in = max(fan_in, spec.input_dim + 1)
    return fan_in


# --- Double-precision reference ----------------------------------------------

def _sigmoid(x: np.ndarray) -> np.ndarray:
    return reference(ActivationFunction.SIGMOID, x)


def _float_cell_step(spec: LayerSpec, w: RecurrentWeights, x_t: np.ndarray,
                     h: np.ndarray, c: Optional[np.ndarray]):
    n = spec.output_dim
    if spec.kind is LayerKind.LSTM:
        z = x_t @ w.kernel + h @ w.recurrent_kernel + w.bias
        i, f = _sigmoid(z[..., :n]), _sigmoid(z[..., n:2 * n])
        g, o = np.tanh(z[..., 2 * n:3 * n]), _sigmoid(z[..., 3 * n:])
        c = f * c + i * g
        return o * np.tanh(c), c
    bias = np.asarray(w.bias).reshape(-1)
    width = 3 * n
    if spec.reset_after:
        xp = x_t @ w.kernel + bias[:width]
        hp = h @ w.recurrent_kernel + bias[width:]
        z = _sigmoid(xp[..., :n] + hp[..., :n])
        r = _sigmoid(xp[..., n:2 * n] + hp[..., n:2 * n])
        h_tilde = np.tanh(xp[..., 2 * n:] + r * hp[..., 2 * n:])
    else:
        xp = x_t @ w.kernel + bias
        hp = h @ w.recurrent_kernel[:, :2 * n]
        z = _sigmoid(xp[..., :n] + hp[..., :n])
        r = _sigmoid(xp[..., n:2 * n] + hp[..., n:2 * n])
        h_tilde = np.tanh(xp[..., 2 * n:] + (r * h) @ w.recurrent_kernel[:, 2 * n:])
    return z * h + (1.0 - z) * h_tilde, None


def run_float(model: NetworkModel, seqs: Any) -> np.ndarray:
    """Double-precision forward pass over [batch x seq_len x input_dim] inputs"""
    x = np.asarray(seqs, dtype=np.float64)
    rnn = model.recurrent_layer
    if rnn is not None:
        batch, n = x.shape[0], rnn.spec.output_dim
        h = np.zeros((batch, n))
        c = np.zeros((batch, n)) if rnn.kind is LayerKind.LSTM else None
        for t in range(x.shape[1]):
            h, c = _float_cell_step(rnn.spec, rnn.weights, x[:, t, :], h, c)
        y = h
    else:
        y = x[:, -1, :]
    for layer in model.head_layers:
        kind = layer.kind
        if kind is LayerKind.DENSE:
            y = y @ layer.weights.kernel + layer.weights.bias
        elif kind is LayerKind.RELU:
            y = np.maximum(y, 0.0)
        elif kind is LayerKind.SIGMOID:
            y = _sigmoid(y)
        elif kind is LayerKind.TANH:
            y = np.tanh(y)
        elif kind is LayerKind.SOFTMAX:
            e = np.exp(y - y.max(axis=-1, keepdims=True))
            y = e / e.sum(axis=-1, keepdims=True)
    return y


# --- Value-level operations ---------------------------------------------------

def hadamard(a: Sequence[FxpValue], b: Sequence[FxpValue],
             out_fmt: Optional[FxpFormat] = None,
             policy: QuantPolicy = DEFAULT_POLICY) -> List[FxpValue]:
    """Elementwise product, each element quantized to the working format"""
    if len(a) != len(b):
        raise DimensionError(f"hadamard length mismatch: {len(a)} vs {len(b)}")
    if not a:
        return []
    out_fmt = out_fmt or a[0].format
    return [requantize_value(x.raw * y.raw, x.format.frac_bits + y.format.frac_bits, out_fmt, policy)
            for x, y in zip(a, b)]


def _as_values(raw: np.ndarray, fmt: FxpFormat) -> List[FxpValue]:
    return [FxpValue(int(v), fmt) for v in np.ravel(raw)]


def _recurrent_spec(kind: LayerKind, w: RecurrentWeights, reset_after: bool) -> LayerSpec:
    kernel = np.asarray(w.kernel)
    recurrent = np.asarray(w.recurrent_kernel)
    if kernel.ndim != 2 or recurrent.ndim != 2:
        raise DimensionError("kernel and recurrent kernel must be matrices")
    n_h = recurrent.shape[0]
    width = kind.gate_count * n_h
    if kernel.shape[1] != width or recurrent.shape[1] != width:
        raise DimensionError(
            f"{kind.value} weights need {width} columns for {n_h} units, got "
            f"{kernel.shape[1]} and {recurrent.shape[1]}")
    bias_len = np.asarray(w.bias).size
    expected_bias = 2 * width if (kind is LayerKind.GRU and reset_after) else width
    if bias_len != expected_bias:
        raise DimensionError(f"bias length {bias_len}, expected {expected_bias}")
    return LayerSpec(kind=kind, input_dim=kernel.shape[0], output_dim=n_h, seq_len=1,
                     reset_after=reset_after)


def _single_step(kind: LayerKind, x_t: Any, state: CellState, w: RecurrentWeights,
                 cfg: EngineConfig, reset_after: bool = True) -> CellState:
    spec = _recurrent_spec(kind, w, reset_after)
    dtype = raw_dtype(cfg.precision, spec.input_dim + spec.output_dim + 1)
    arith = _Arith(cfg, dtype)
    cell = RecurrentCell(spec, w, arith)
    if len(x_t) != spec.input_dim:
        raise DimensionError(f"input length {len(x_t)} does not match {spec.input_dim}")
    if np.asarray(state.h).shape[-1] != spec.output_dim:
        raise DimensionError(f"state length {np.asarray(state.h).shape[-1]} does not match "
                             f"{spec.output_dim} units")
    x_raw = from_values(x_t, cfg.precision, cfg.policy, dtype)
    h = from_values(_as_values(state.h, state.format), cfg.precision, cfg.policy, dtype)
    c = None
    if kind is LayerKind.LSTM:
        cell_raw = state.c if state.c is not None else np.zeros_like(state.h)
        c = from_values(_as_values(cell_raw, state.format), cfg.precision, cfg.policy, dtype)
    return cell.step(x_raw, CellState(h=h, c=c, format=cfg.precision))


def lstm_step(x_t: Any, state: CellState, w: RecurrentWeights,
              cfg: Optional[EngineConfig] = None) -> CellState:
    """One LSTM timestep on a single input vector (reals or FxpValues)"""
    return _single_step(LayerKind.LSTM, x_t, state, w, cfg or EngineConfig())


def gru_step(x_t: Any, state: CellState, w: RecurrentWeights,
             cfg: Optional[EngineConfig] = None, reset_after: bool = True) -> CellState:
    """One GRU timestep on a single input vector (reals or FxpValues)"""
    return _single_step(LayerKind.GRU, x_t, state, w, cfg or EngineConfig(), reset_after)


def run_sequence(model: NetworkModel, seq: Any,
                 cfg: Optional[EngineConfig] = None) -> List[FxpValue]:
    return InferenceEngine(model, cfg).run_sequence(seq)


def run_batch(model: NetworkModel, data: Any, cfg: Optional[EngineConfig] = None,
              workers: int = 1) -> np.ndarray:
    engine = InferenceEngine(model, cfg)
    scores = engine.run_batch(data, workers=workers)
    logging.debug(f"run_batch: {len(scores)} rows at {engine.cfg.precision} "
                  f"({engine.cfg.mode.value})")
    return scores


__all__ = [
    'DEFAULT_PRECISION',
    'EngineConfig',
    'CellState',
    'RecurrentCell',
    'TimestepBlock',
    'InferenceEngine',
    'run_float',
    'hadamard',
    'lstm_step',
    'gru_step',
    'run_sequence',
    'run_batch',
]
