"""JSON model exchange format"""

import json

import numpy as np
import pytest

from src.models import LayerKind
from src.collectors.weights import load_model, save_model, model_to_dict, model_from_dict
from src.core.fixtures import make_benchmark_shape
from src.core.errors import ModelLoadError, ShapeMismatchError

from factories import random_network


def _write(path, document):
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_round_trip(tmp_path):
    for cell in ("lstm", "gru"):
        model = make_benchmark_shape("top_tagging", cell)
        loaded = load_model(save_model(model, tmp_path / f"{cell}.json"))
        assert loaded == model


def test_round_trip_gru_without_reset_after(tmp_path, rng):
    model = random_network(rng, LayerKind.GRU, reset_after=False, head=(5,))
    loaded = load_model(save_model(model, tmp_path / "gru.json"))
    assert loaded == model
    assert loaded.layers[0].spec.reset_after is False


def test_top_tagging_layers(tmp_path):
    path = save_model(make_benchmark_shape("top_tagging", "lstm"), tmp_path / "top.json")
    model = load_model(path)
    kinds = [(layer.kind.value, layer.spec.input_dim, layer.spec.output_dim) for layer in model.layers]
    assert kinds == [("lstm", 6, 20), ("dense", 20, 64), ("relu", 64, 64), ("dense", 64, 1),
                     ("sigmoid", 1, 1)]
    assert model.seq_len == 20


def test_empty_layer_list(tmp_path):
    with pytest.raises(ModelLoadError, match="empty layer list"):
        load_model(_write(tmp_path / "m.json", {"name": "m", "layers": []}))


def test_kernel_shape_mismatch(tmp_path):
    document = model_to_dict(make_benchmark_shape("top_tagging", "lstm"))
    document["layers"][0]["weights"]["kernel"] = np.zeros((6, 79)).tolist()
    with pytest.raises(ShapeMismatchError) as info:
        load_model(_write(tmp_path / "m.json", document))
    assert info.value.layer == "lstm"
    assert "[6 x 80]" in str(info.value)
    assert "[6 x 79]" in str(info.value)


def test_unknown_kind():
    with pytest.raises(ModelLoadError, match="unknown layer kind"):
        model_from_dict({"layers": [{"kind": "conv2d", "input_dim": 3, "units": 3}]})


def test_gru_bias_as_two_rows(rng):
    model = random_network(rng, LayerKind.GRU, input_dim=2, units=3)
    document = model_to_dict(model)
    document["layers"][0]["weights"]["bias"] = np.asarray(
        document["layers"][0]["weights"]["bias"]).reshape(2, 9).tolist()
    assert model_from_dict(document) == model


def test_missing_and_malformed(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ModelLoadError):
        load_model(bad)
    with pytest.raises(ModelLoadError, match="seq_len"):
        model_from_dict({"layers": [{"kind": "lstm", "input_dim": 1, "units": 1,
                                     "weights": {}}]})


def test_undecodable_bytes(tmp_path):
    path = tmp_path / "m.json"
    path.write_bytes(b'{"name": "\xff\xfe"}')
    with pytest.raises(ModelLoadError, match="cannot parse"):
        load_model(path)


def test_metadata_must_be_object():
    document = model_to_dict(make_benchmark_shape("top_tagging", "gru"))
    document["metadata"] = [1, 2]
    with pytest.raises(ModelLoadError, match="metadata"):
        model_from_dict(document)
    document["metadata"] = None
    assert model_from_dict(document).metadata == {}
