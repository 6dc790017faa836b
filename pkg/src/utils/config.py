"""
RnnHlsProfiler - Configuration
Config file loading (JSON, YAML, TOML), external data file lookup and
merging of file values under command-line flags
"""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union
import json
import logging
import os
import sys

import yaml

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from ..core.errors import ConfigError

ENV_DEVICE_DB = "RNNHLS_DEVICE_DB"
ENV_CALIBRATION = "RNNHLS_CALIBRATION"

REPO_ROOT = Path(__file__).resolve().parent.parent.parent


def load_structured_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Parse a JSON, YAML or TOML file into a dictionary.

    Raises:
        ConfigError: unreadable file, parse failure or non-mapping document
    """
    path = Path(path)
    suffix = path.suffix.lower()
    try:
        if suffix == '.toml':
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        else:
            with open(path, 'r', encoding='utf-8') as f:
                if suffix in ('.yaml', '.yml'):
                    data = yaml.safe_load(f)
                else:
                    data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}")
    except (json.JSONDecodeError, yaml.YAMLError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``override`` into a copy of ``base``"""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def candidate_paths(filename: str, env_var: Optional[str] = None) -> List[Path]:
    """Lookup order for an external data file: env var, cwd, executable dir, repo root"""
    paths = []
    if env_var and os.environ.get(env_var):
        paths.append(Path(os.environ[env_var]))
    paths.append(Path(os.getcwd()) / filename)
    if getattr(sys, 'frozen', False):
        paths.append(Path(sys.executable).parent / filename)
    paths.append(REPO_ROOT / filename)
    return paths


def load_external(filename: str, defaults: Dict[str, Any], env_var: Optional[str] = None,
                  explicit: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Built-in defaults deep-merged with the first readable external file.

    An explicit path must exist; candidates found through the lookup order
    that fail to parse are logged and skipped.
    """
    if explicit is not None:
        data = load_structured_file(explicit)
        logging.info(f"Loaded {filename} overrides from {explicit}")
        return deep_merge(defaults, data)

    for path in candidate_paths(filename, env_var):
        if not path.exists():
            continue
        try:
            data = load_structured_file(path)
        except ConfigError as e:
            logging.warning(f"Failed to load external {filename} from {path}: {e}")
            continue
        logging.info(f"Loaded external {filename} from {path}")
        return deep_merge(defaults, data)
    return dict(defaults)


def normalize_keys(data: Dict[str, Any]) -> Dict[str, Any]:
    return {str(k).replace('-', '_'): v for k, v in data.items()}


def config_for_command(data: Dict[str, Any], command: str,
                       commands: Iterable[str]) -> Dict[str, Any]:
    """
    Flatten a config document for one subcommand: top-level keys apply to
    every command, a section named after the command overrides them.
    """
    sections = {c.replace('-', '_') for c in commands}
    flat = {k: v for k, v in normalize_keys(data).items() if k not in sections}
    section = normalize_keys(data).get(command.replace('-', '_'))
    if isinstance(section, dict):
        flat.update(normalize_keys(section))
    return flat


__all__ = [
    'ENV_DEVICE_DB',
    'ENV_CALIBRATION',
    'REPO_ROOT',
    'load_structured_file',
    'deep_merge',
    'candidate_paths',
    'load_external',
    'normalize_keys',
    'config_for_command',
]
