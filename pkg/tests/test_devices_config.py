"""Device database, calibration sidecar and config files"""

import json

import pytest

from src.collectors.devices import BUILTIN_DEVICES, load_devices, get_device, load_calibration
from src.core.perf import DEFAULT_CALIBRATION
from src.utils.config import (
    ENV_DEVICE_DB, ENV_CALIBRATION, load_structured_file, deep_merge, load_external,
    config_for_command
)
from src.core.errors import UnknownDeviceError, ConfigError


def _json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestDevices:
    def test_builtin_parts_and_aliases(self):
        devices = load_devices()
        for name in BUILTIN_DEVICES:
            assert name in devices
        assert devices["ku115"] is devices["xcku115-flvb2104-2-i"]
        assert devices["u250"].dsp == 12288
        assert get_device(" XCKU115 ").dsp == 5520

    def test_unknown_device(self):
        with pytest.raises(UnknownDeviceError, match="unknown device 'zynq'"):
            get_device("zynq")

    def test_explicit_file_extends_and_overrides(self, tmp_path):
        path = _json(tmp_path / "parts.json", {
            "_comment": "test parts",
            "xcku115-flvb2104-2-i": {"dsp": 6000},
            "xc7z020": {"dsp": 220, "lut": 53200, "ff": 106400, "bram": 140, "aliases": ["z020"]},
        })
        devices = load_devices(path)
        assert devices["xcku115"].dsp == 6000
        assert devices["xcku115"].lut == 663360
        assert devices["z020"].bram == 140
        assert "_comment" not in devices

    def test_env_file(self, tmp_path, monkeypatch):
        path = _json(tmp_path / "db.json", {"xcvu9p-slr": {"dsp": 1}})
        monkeypatch.setenv(ENV_DEVICE_DB, str(path))
        assert get_device("vu9p").dsp == 1

    def test_cwd_file(self, tmp_path):
        _json(tmp_path / "devices.json", {"xcvu9p-slr": {"bram": 2}})
        assert get_device("xcvu9p-slr").bram == 2

    def test_broken_candidate_is_skipped(self, tmp_path):
        (tmp_path / "devices.json").write_text("{broken", encoding="utf-8")
        assert get_device("xcku115").dsp == 5520

    def test_broken_explicit_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="mapping"):
            load_devices(bad)
        with pytest.raises(ConfigError):
            load_devices(tmp_path / "missing.json")

    def test_invalid_budget(self, tmp_path):
        path = _json(tmp_path / "parts.json", {"tiny": {"dsp": 1}})
        with pytest.raises(ConfigError, match="tiny"):
            load_devices(path)


class TestCalibration:
    def test_defaults(self):
        assert load_calibration() == DEFAULT_CALIBRATION

    def test_overrides(self, tmp_path, monkeypatch):
        path = _json(tmp_path / "cal.json", {"_comment": "fit", "c0": 12.0, "a_lut": 2.0})
        monkeypatch.setenv(ENV_CALIBRATION, str(path))
        cal = load_calibration()
        assert (cal.c0, cal.a_lut, cal.c1) == (12.0, 2.0, 1.0)

    def test_unknown_key(self, tmp_path):
        path = _json(tmp_path / "cal.json", {"c7": 1})
        with pytest.raises(ConfigError):
            load_calibration(path)


class TestConfigFiles:
    def test_formats(self, tmp_path):
        (tmp_path / "a.yaml").write_text("device: u250\nsweep-reuse:\n  workers: 2\n",
                                         encoding="utf-8")
        (tmp_path / "a.toml").write_text('device = "u250"\n[sweep-reuse]\nworkers = 2\n',
                                         encoding="utf-8")
        _json(tmp_path / "a.json", {"device": "u250", "sweep-reuse": {"workers": 2}})
        documents = [load_structured_file(tmp_path / name) for name in ("a.yaml", "a.toml", "a.json")]
        assert documents[0] == documents[1] == documents[2]

    def test_empty_yaml(self, tmp_path):
        (tmp_path / "e.yml").write_text("", encoding="utf-8")
        assert load_structured_file(tmp_path / "e.yml") == {}

    def test_parse_error(self, tmp_path):
        (tmp_path / "x.toml").write_text("= nope", encoding="utf-8")
        with pytest.raises(ConfigError, match="cannot parse"):
            load_structured_file(tmp_path / "x.toml")

    def test_deep_merge(self):
        base = {"a": 1, "b": {"c": 2, "d": 3}}
        merged = deep_merge(base, {"b": {"d": 4}, "e": 5})
        assert merged == {"a": 1, "b": {"c": 2, "d": 4}, "e": 5}
        assert base["b"]["d"] == 3

    def test_load_external_without_file(self):
        assert load_external("nothing_here.json", {"k": 1}) == {"k": 1}

    def test_section_overrides_top_level(self):
        data = {"device": "u250", "workers": 1, "sweep-reuse": {"workers": 4},
                "infer": {"precision": "fixed<18,8>"}}
        commands = ["infer", "sweep-reuse"]
        assert config_for_command(data, "sweep-reuse", commands) == {"device": "u250", "workers": 4}
        assert config_for_command(data, "infer", commands) == {
            "device": "u250", "workers": 1, "precision": "fixed<18,8>"}
