"""
RnnHlsProfiler - Error Types
Exception hierarchy shared by the library and the command-line driver
"""

from typing import Optional, Sequence


class RnnHlsError(Exception):
    """Base class for every error raised by RnnHlsProfiler"""
    exit_code = 3


class FormatError(RnnHlsError, ValueError):
    """Invalid fixed-point format or format string"""


class QuantizationError(RnnHlsError, ValueError):
    """A value cannot be quantized (e.g. NaN or infinity)"""


class ModelLoadError(RnnHlsError, ValueError):
    """Model file could not be parsed or fails validation"""


class ShapeMismatchError(ModelLoadError):
    """A weight tensor does not have the shape its layer requires"""

    def __init__(self, layer: str, tensor: str,
                 expected: Sequence[int], actual: Sequence[int]):
        self.layer = layer
        self.tensor = tensor
        self.expected = tuple(expected)
        self.actual = tuple(actual)
        super().__init__(
            f"layer '{layer}': {tensor} shape mismatch, expected "
            f"{_fmt_shape(self.expected)} but got {_fmt_shape(self.actual)}"
        )


class DimensionError(RnnHlsError, ValueError):
    """Vector or matrix dimensions are inconsistent"""


class DatasetError(RnnHlsError, ValueError):
    """Dataset file or rows are malformed"""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MetricError(RnnHlsError, ValueError):
    """Metric is undefined for the given inputs"""


class UnknownDeviceError(RnnHlsError, KeyError):
    """Part number not present in the device budget database"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown device"


class FixtureError(RnnHlsError, ValueError):
    """Unknown benchmark name or invalid fixture request"""


class ConfigError(RnnHlsError, ValueError):
    """Configuration file or calibration sidecar is invalid"""
    exit_code = 2


def _fmt_shape(shape: Sequence[int]) -> str:
    return "[" + " x ".join(str(d) for d in shape) + "]"


__all__ = [
    'RnnHlsError',
    'FormatError',
    'QuantizationError',
    'ModelLoadError',
    'ShapeMismatchError',
    'DimensionError',
    'DatasetError',
    'MetricError',
    'UnknownDeviceError',
    'FixtureError',
    'ConfigError',
]
