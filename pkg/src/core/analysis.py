"""
RnnHlsProfiler - Network Analysis
Parameter and multiplication counting, and the structural checks every
loaded or generated model must pass
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Any

from ..models import (
    NetworkModel, Layer, LayerKind, LayerSpec, RecurrentWeights, DenseWeights
)
from .errors import ModelLoadError, ShapeMismatchError


@dataclass
class LayerCount:
    """Trainable parameters of one layer"""
    name: str
    kind: str
    parameters: int


@dataclass
class ParameterCount:
    """Per-layer breakdown of trainable parameters"""
    layers: List[LayerCount] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(layer.parameters for layer in self.layers)

    @property
    def recurrent(self) -> int:
        return sum(layer.parameters for layer in self.layers
                   if layer.kind in (LayerKind.LSTM.value, LayerKind.GRU.value))

    @property
    def non_recurrent(self) -> int:
        return self.total - self.recurrent

    def to_dict(self) -> Dict[str, Any]:
        return {
            'layers': [{'name': l.name, 'kind': l.kind, 'parameters': l.parameters}
                       for l in self.layers],
            'recurrent': self.recurrent,
            'non_recurrent': self.non_recurrent,
            'total': self.total,
        }


@dataclass
class MultiplyCount:
    """Multiplications of one layer per inference (per step for recurrent layers)"""
    name: str
    kind: str
    kernel_mults_per_step: int = 0
    recurrent_mults_per_step: int = 0
    dense_mults: int = 0

    @property
    def per_step(self) -> int:
        return self.kernel_mults_per_step + self.recurrent_mults_per_step


def layer_name(layer: Layer, index: int) -> str:
    return layer.spec.name or f"{layer.kind.value}_{index}"


def recurrent_parameter_count(kind: LayerKind, input_dim: int, units: int,
                              reset_after: bool = True) -> int:
    """
    Trainable parameters of an LSTM or GRU layer.

    A GRU with reset_after carries separate input and recurrent biases,
    doubling its bias term.
    """
    gates = kind.gate_count
    biases = 2 * units if (kind is LayerKind.GRU and reset_after) else units
    return gates * (input_dim * units + units * units + biases)


def count_parameters(model: NetworkModel) -> ParameterCount:
    """Per-layer and total trainable parameter counts"""
    result = ParameterCount()
    for index, layer in enumerate(model.layers):
        spec = layer.spec
        if spec.kind.is_recurrent:
            params = recurrent_parameter_count(spec.kind, spec.input_dim, spec.output_dim,
                                               spec.reset_after)
        elif spec.kind is LayerKind.DENSE:
            params = spec.input_dim * spec.output_dim + spec.output_dim
        else:
            params = 0
        result.layers.append(LayerCount(layer_name(layer, index), spec.kind.value, params))
    return result


def total_parameters(model: NetworkModel) -> int:
    return count_parameters(model).total


def count_multiplies(model: NetworkModel) -> List[MultiplyCount]:
    """Per-layer multiplications; recurrent layers report per-timestep counts"""
    counts = []
    for index, layer in enumerate(model.layers):
        spec = layer.spec
        entry = MultiplyCount(layer_name(layer, index), spec.kind.value)
        if spec.kind.is_recurrent:
            gates = spec.gates
            entry.kernel_mults_per_step = gates * spec.input_dim * spec.output_dim
            entry.recurrent_mults_per_step = gates * spec.output_dim * spec.output_dim
        elif spec.kind is LayerKind.DENSE:
            entry.dense_mults = spec.input_dim * spec.output_dim
        counts.append(entry)
    return counts


def expected_weight_shapes(spec: LayerSpec) -> Dict[str, Tuple[int, ...]]:
    """Shapes the weight tensors of a layer must have"""
    if spec.kind.is_recurrent:
        width = spec.gates * spec.output_dim
        bias = (2 * width,) if (spec.kind is LayerKind.GRU and spec.reset_after) else (width,)
        return {
            'kernel': (spec.input_dim, width),
            'recurrent_kernel': (spec.output_dim, width),
            'bias': bias,
        }
    if spec.kind is LayerKind.DENSE:
        return {'kernel': (spec.input_dim, spec.output_dim), 'bias': (spec.output_dim,)}
    return {}


def validate_model(model: NetworkModel) -> NetworkModel:
    """
    Check layer dimensions, weight shapes and chaining.

    Raises:
        ModelLoadError: empty model, bad dimensions, broken chaining or
            more than one recurrent layer
        ShapeMismatchError: a weight tensor has the wrong shape
    """
    if not model.layers:
        raise ModelLoadError(f"model '{model.name}' has no layers")

    recurrent_seen = 0
    previous_out: Optional[int] = None
    for index, layer in enumerate(model.layers):
        spec = layer.spec
        name = layer_name(layer, index)
        if spec.input_dim < 1 or spec.output_dim < 1:
            raise ModelLoadError(f"layer '{name}': dimensions must be >= 1")
        if previous_out is not None and spec.input_dim != previous_out:
            raise ModelLoadError(
                f"layer '{name}': input_dim {spec.input_dim} does not match "
                f"previous layer output {previous_out}")
        if spec.kind.is_activation and spec.input_dim != spec.output_dim:
            raise ModelLoadError(f"layer '{name}': activation must preserve its width")

        if spec.kind.is_recurrent:
            recurrent_seen += 1
            if recurrent_seen > 1:
                raise ModelLoadError("at most one recurrent layer is supported")
            if index != 0:
                raise ModelLoadError(f"layer '{name}': the recurrent layer must come first")
            if spec.seq_len is None or spec.seq_len < 1:
                raise ModelLoadError(f"layer '{name}': seq_len must be >= 1")
            if spec.return_sequences:
                raise ModelLoadError(f"layer '{name}': return_sequences is not supported")
            if not isinstance(layer.weights, RecurrentWeights):
                raise ModelLoadError(f"layer '{name}': missing recurrent weights")
        elif spec.kind is LayerKind.DENSE:
            if not isinstance(layer.weights, DenseWeights):
                raise ModelLoadError(f"layer '{name}': missing dense weights")

        for tensor, expected in expected_weight_shapes(spec).items():
            actual = tuple(getattr(layer.weights, tensor).shape)
            if actual != expected:
                raise ShapeMismatchError(name, tensor, expected, actual)

        previous_out = spec.output_dim
    return model


__all__ = [
    'LayerCount',
    'ParameterCount',
    'MultiplyCount',
    'layer_name',
    'recurrent_parameter_count',
    'count_parameters',
    'total_parameters',
    'count_multiplies',
    'expected_weight_shapes',
    'validate_model',
]
