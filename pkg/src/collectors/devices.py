"""
RnnHlsProfiler - Device and Calibration Database
Built-in FPGA part budgets and estimator constants, overridable from an
external devices.json / calibration.json without touching the code
"""

from pathlib import Path
from typing import Any, Dict, Optional, Union
import logging

from ..models import DeviceBudget
from ..core.errors import UnknownDeviceError, ConfigError
from ..core.perf import Calibration
from ..utils.config import load_external, ENV_DEVICE_DB, ENV_CALIBRATION

BUILTIN_DEVICES: Dict[str, Dict[str, Any]] = {
    "xcku115-flvb2104-2-i": {
        "dsp": 5520, "lut": 663360, "ff": 1326720, "bram": 2160,
        "aliases": ["xcku115", "ku115"],
    },
    "xcu250-figd2104-2-e": {
        "dsp": 12288, "lut": 1728000, "ff": 3456000, "bram": 2688,
        "aliases": ["xcu250", "u250", "alveo-u250"],
    },
    "xcvu9p-slr": {
        "dsp": 2280, "lut": 394080, "ff": 788160, "bram": 720,
        "aliases": ["vu9p-slr", "vu9p"],
    },
}


def _entries(data: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    return {k: v for k, v in data.items() if not k.startswith('_') and isinstance(v, dict)}


def load_devices(path: Optional[Union[str, Path]] = None) -> Dict[str, DeviceBudget]:
    """
    Device budgets keyed by part name and alias.

    External entries are merged over the built-in ones, so a file may add
    a new part or change a single field of an existing one.
    """
    data = load_external("devices.json", BUILTIN_DEVICES, ENV_DEVICE_DB, path)
    devices: Dict[str, DeviceBudget] = {}
    for name, entry in _entries(data).items():
        try:
            budget = DeviceBudget.from_dict(name, entry)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"device '{name}': invalid budget ({e})")
        devices[name.lower()] = budget
        for alias in entry.get('aliases', []) or []:
            devices.setdefault(str(alias).lower(), budget)
    logging.debug(f"Device database: {len(_entries(data))} parts")
    return devices


def get_device(name: str, path: Optional[Union[str, Path]] = None) -> DeviceBudget:
    """Look up one device budget by part name or alias"""
    devices = load_devices(path)
    key = name.strip().lower()
    if key not in devices:
        raise UnknownDeviceError(f"unknown device '{name}' (known: {', '.join(sorted(devices))})")
    return devices[key]


def load_calibration(path: Optional[Union[str, Path]] = None) -> Calibration:
    """Estimator constants: built-in defaults with calibration.json overrides"""
    data = load_external("calibration.json", Calibration().to_dict(), ENV_CALIBRATION, path)
    values = {k: v for k, v in data.items() if not k.startswith('_')}
    return Calibration.from_dict(values)


__all__ = [
    'BUILTIN_DEVICES',
    'load_devices',
    'get_device',
    'load_calibration',
]
