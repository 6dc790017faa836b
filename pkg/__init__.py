"""
RnnHlsProfiler - Recurrent Network HLS Profiler
Bit-accurate fixed-point LSTM/GRU emulation and FPGA performance estimation
for hls4ml-style recurrent designs
"""

__version__ = "1.0.0"
__author__ = "RnnHlsProfiler Team"
__description__ = "Fixed-point RNN emulator and FPGA performance estimator"

from .src.core.engine import InferenceEngine, EngineConfig
from .src.core.perf import estimate
from .src.models import NetworkModel, HardwareConfig, PerfEstimate

__all__ = ['InferenceEngine', 'EngineConfig', 'estimate', 'NetworkModel', 'HardwareConfig',
           'PerfEstimate']
