"""
Shared pytest setup: the repository root goes on sys.path the same way the
entry point does it, so tests import ``src.*`` like the application.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from src.core.fxp import FxpFormat  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def working_format():
    return FxpFormat.fixed(16, 6)


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Run every test in its own directory with no external data overrides"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("RNNHLS_DEVICE_DB", raising=False)
    monkeypatch.delenv("RNNHLS_CALIBRATION", raising=False)
    return tmp_path

