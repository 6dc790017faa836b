"""
RnnHlsProfiler - Model Weight Loader
Reads and writes the JSON network exchange format and validates shapes
"""

from pathlib import Path
from typing import Dict, List, Any, Union
import json
import logging

import numpy as np

from ..models import (
    NetworkModel, Layer, LayerSpec, LayerKind, RecurrentWeights, DenseWeights
)
from ..core.analysis import validate_model, expected_weight_shapes
from ..core.errors import ModelLoadError, ShapeMismatchError

SCHEMA_VERSION = 1


def _matrix(data: Any, layer: str, tensor: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ModelLoadError(f"layer '{layer}': {tensor} is not numeric ({e})")
    if not np.all(np.isfinite(arr)):
        raise ModelLoadError(f"layer '{layer}': {tensor} contains non-finite values")
    return arr


def _check_shape(arr: np.ndarray, expected: tuple, layer: str, tensor: str) -> np.ndarray:
    if arr.shape != expected:
        raise ShapeMismatchError(layer, tensor, expected, arr.shape)
    return arr


def _parse_int(entry: Dict[str, Any], key: str, layer: str, required: bool = True) -> Any:
    value = entry.get(key)
    if value is None:
        if required:
            raise ModelLoadError(f"layer '{layer}': missing '{key}'")
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelLoadError(f"layer '{layer}': '{key}' must be an integer")
    return value


def layer_from_dict(entry: Dict[str, Any], index: int) -> Layer:
    """Build one Layer from its JSON object"""
    if not isinstance(entry, dict):
        raise ModelLoadError(f"layer {index}: expected an object")
    raw_kind = str(entry.get('kind', '')).strip().lower()
    try:
        kind = LayerKind(raw_kind)
    except ValueError:
        raise ModelLoadError(f"layer {index}: unknown layer kind '{entry.get('kind')}'")

    name = entry.get('name') or f"{kind.value}_{index}"
    input_dim = _parse_int(entry, 'input_dim', name)
    units = _parse_int(entry, 'units', name, required=not kind.is_activation)
    if units is None:
        units = input_dim

    spec = LayerSpec(
        kind=kind,
        input_dim=input_dim,
        output_dim=units,
        seq_len=_parse_int(entry, 'seq_len', name, required=kind.is_recurrent),
        return_sequences=bool(entry.get('return_sequences', False)),
        reset_after=bool(entry.get('reset_after', True)),
        name=entry.get('name', ""),
    )

    if kind.is_activation:
        return Layer(spec=spec)

    weights = entry.get('weights')
    if not isinstance(weights, dict):
        raise ModelLoadError(f"layer '{name}': missing 'weights' object")
    shapes = expected_weight_shapes(spec)
    tensors = {}
    for tensor, expected in shapes.items():
        if tensor not in weights:
            raise ModelLoadError(f"layer '{name}': missing weight tensor '{tensor}'")
        arr = _matrix(weights[tensor], name, tensor)
        if tensor == 'bias' and arr.ndim == 2 and arr.size == int(np.prod(expected)):
            arr = arr.reshape(expected)  # Keras stores the GRU double bias as [2 x G*n_h]
        tensors[tensor] = _check_shape(arr, expected, name, tensor)

    if kind.is_recurrent:
        return Layer(spec=spec, weights=RecurrentWeights(**tensors))
    return Layer(spec=spec, weights=DenseWeights(**tensors))


def model_from_dict(data: Dict[str, Any]) -> NetworkModel:
    """Build and validate a NetworkModel from the parsed JSON document"""
    if not isinstance(data, dict):
        raise ModelLoadError("model document must be a JSON object")
    layers_data = data.get('layers')
    if not isinstance(layers_data, list) or not layers_data:
        raise ModelLoadError("model has an empty layer list")
    layers = [layer_from_dict(entry, index) for index, entry in enumerate(layers_data)]
    metadata = data.get('metadata') or {}
    if not isinstance(metadata, dict):
        raise ModelLoadError("'metadata' must be a JSON object")
    model = NetworkModel(
        name=str(data.get('name', 'model')),
        layers=layers,
        metadata=dict(metadata),
    )
    return validate_model(model)


def load_model(path: Union[str, Path]) -> NetworkModel:
    """
    Load a network from the JSON exchange format.

    Args:
        path: Path to the model JSON file

    Returns:
        Validated NetworkModel

    Raises:
        FileNotFoundError: file does not exist
        ModelLoadError: parse failure, unknown kind or shape mismatch
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelLoadError(f"cannot parse {path}: {e}")

    model = model_from_dict(data)
    logging.info(f"Loaded model '{model.name}' from {path} ({len(model.layers)} layers)")
    return model


def _tensor_list(arr: np.ndarray) -> List[Any]:
    # repr-exact floats so save/load is an identity
    return np.asarray(arr, dtype=np.float64).tolist()


def model_to_dict(model: NetworkModel) -> Dict[str, Any]:
    layers = []
    for layer in model.layers:
        spec = layer.spec
        entry: Dict[str, Any] = {'kind': spec.kind.value, 'input_dim': spec.input_dim,
                                 'units': spec.output_dim}
        if spec.name:
            entry['name'] = spec.name
        if spec.kind.is_recurrent:
            entry['seq_len'] = spec.seq_len
            entry['return_sequences'] = spec.return_sequences
            if spec.kind is LayerKind.GRU:
                entry['reset_after'] = spec.reset_after
            entry['weights'] = {
                'kernel': _tensor_list(layer.weights.kernel),
                'recurrent_kernel': _tensor_list(layer.weights.recurrent_kernel),
                'bias': _tensor_list(layer.weights.bias),
            }
        elif spec.kind is LayerKind.DENSE:
            entry['weights'] = {
                'kernel': _tensor_list(layer.weights.kernel),
                'bias': _tensor_list(layer.weights.bias),
            }
        layers.append(entry)
    return {
        'schema_version': SCHEMA_VERSION,
        'name': model.name,
        'metadata': dict(model.metadata),
        'layers': layers,
    }


def save_model(model: NetworkModel, path: Union[str, Path]) -> Path:
    """Write a model in the JSON exchange format"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(model_to_dict(model), f, indent=1)
        f.write('\n')
    logging.info(f"Saved model '{model.name}' to {path}")
    return path


__all__ = [
    'SCHEMA_VERSION',
    'layer_from_dict',
    'model_from_dict',
    'load_model',
    'model_to_dict',
    'save_model',
]
