"""
RnnHlsProfiler - Activation Functions
Lookup-table sigmoid, tanh and softmax (exp and reciprocal tables) plus
exact ReLU, evaluated on raw fixed-point tensors
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Any
import math

import numpy as np

from .fxp import (
    FxpFormat, FxpValue, QuantPolicy, Rounding, Overflow, DEFAULT_POLICY,
    quantize_array, requantize, to_real
)
from .errors import DimensionError, FormatError


class ActivationFunction(Enum):
    """Functions that are realised as lookup tables"""
    SIGMOID = "sigmoid"
    TANH = "tanh"
    EXP = "exp"
    INV = "inv"


class Sampling(Enum):
    """Where inside each bin the stored function value is sampled"""
    MIDPOINT = "midpoint"
    LEFT_EDGE = "left_edge"


class ActivationMode(Enum):
    """
    LUT evaluates tables the way the hardware does; DIRECT evaluates the
    function in double precision and quantizes the result.
    """
    LUT = "lut"
    DIRECT = "direct"

    @classmethod
    def parse(cls, text: Any) -> 'ActivationMode':
        if isinstance(text, ActivationMode):
            return text
        return cls(str(text).strip().lower())


DEFAULT_ENTRY_FORMAT = FxpFormat.fixed(18, 8)
SOFTMAX_ENTRY_FORMAT = FxpFormat.ufixed(18, 1)

# Table entries are rounded to nearest at build time; saturation keeps
# reciprocal entries near zero inside the entry range
_TABLE_POLICY = QuantPolicy(Rounding.NEAREST_EVEN, Overflow.SATURATE)


@dataclass(frozen=True)
class LutConfig:
    """Table size, input bound r and entry format of one lookup table"""
    table_size: int = 1024
    input_range: float = 8.0
    entry_format: FxpFormat = DEFAULT_ENTRY_FORMAT
    sampling: Sampling = Sampling.MIDPOINT

    def __post_init__(self):
        size = self.table_size
        if isinstance(size, bool) or not isinstance(size, int) or size < 2 or size & (size - 1):
            raise FormatError(f"table size must be a power of two >= 2, got {size!r}")
        if not (isinstance(self.input_range, (int, float)) and math.isfinite(self.input_range)
                and self.input_range > 0):
            raise FormatError(f"input range must be a positive real, got {self.input_range!r}")
        if not isinstance(self.entry_format, FxpFormat):
            raise FormatError("entry format must be an FxpFormat")

    def with_entry_format(self, fmt: FxpFormat) -> 'LutConfig':
        return LutConfig(self.table_size, self.input_range, fmt, self.sampling)

    def to_dict(self) -> dict:
        return {
            'table_size': self.table_size,
            'input_range': self.input_range,
            'entry_format': str(self.entry_format),
            'sampling': self.sampling.value,
        }

    @classmethod
    def from_dict(cls, data: dict, default: Optional['LutConfig'] = None) -> 'LutConfig':
        base = default or cls()
        return cls(
            table_size=int(data.get('table_size', base.table_size)),
            input_range=float(data.get('input_range', base.input_range)),
            entry_format=(FxpFormat.parse(data['entry_format']) if 'entry_format' in data
                          else base.entry_format),
            sampling=Sampling(data.get('sampling', base.sampling.value)),
        )


DEFAULT_SIGMOID_LUT = LutConfig()
DEFAULT_TANH_LUT = LutConfig()
DEFAULT_EXP_LUT = LutConfig(4096, 8.0, SOFTMAX_ENTRY_FORMAT)
DEFAULT_INV_LUT = LutConfig(4096, 16.0, SOFTMAX_ENTRY_FORMAT)


def reference(function: ActivationFunction, x: np.ndarray) -> np.ndarray:
    """Double-precision value of a table function"""
    x = np.asarray(x, dtype=np.float64)
    if function is ActivationFunction.SIGMOID:
        # Split by sign so exp never overflows
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        return out
    if function is ActivationFunction.TANH:
        return np.tanh(x)
    if function is ActivationFunction.EXP:
        return np.exp(x)
    with np.errstate(divide='ignore'):
        return 1.0 / x


def table_domain(function: ActivationFunction, r: float) -> Tuple[Fraction, Fraction]:
    """Half-open input interval [lo, hi) covered by a table"""
    bound = Fraction(r)
    if function is ActivationFunction.EXP:
        return -bound, Fraction(0)
    if function is ActivationFunction.INV:
        return Fraction(0), bound
    return -bound, bound


def derivative_bound(function: ActivationFunction, r: float, lower: float = 1.0) -> float:
    """sup |f'| over the table domain; for the reciprocal, over x >= ``lower``"""
    if function is ActivationFunction.SIGMOID:
        return 0.25
    if function is ActivationFunction.INV:
        return math.inf if lower <= 0 else 1.0 / (lower * lower)
    return 1.0


class LookupTable:
    """
    A built table: quantized function values for each of the N bins.

    Bin index of x is floor((x - lo) * N / (hi - lo)), computed exactly on the
    raw integer and clipped to [0, N-1] so out-of-range inputs take the
    boundary entry.
    """

    def __init__(self, function: ActivationFunction, cfg: LutConfig):
        self.function = function
        self.cfg = cfg
        self.lo, self.hi = table_domain(function, cfg.input_range)
        self.span = self.hi - self.lo
        n = cfg.table_size
        offset = 0.5 if cfg.sampling is Sampling.MIDPOINT else 0.0
        width = float(self.span) / n
        self.sample_points = float(self.lo) + (np.arange(n, dtype=np.float64) + offset) * width
        values = reference(function, self.sample_points)
        fmt = cfg.entry_format
        values = np.clip(np.nan_to_num(values, posinf=float(fmt.max_value)),
                         float(fmt.min_value), float(fmt.max_value))
        self.entries = quantize_array(values, fmt, _TABLE_POLICY)

    @property
    def bin_width(self) -> float:
        return float(self.span) / self.cfg.table_size

    def index(self, raw: np.ndarray, frac_bits: int) -> np.ndarray:
        """Bin index for raw inputs held at ``frac_bits``"""
        raw = np.asarray(raw)
        n = self.cfg.table_size
        scale = 1 << frac_bits
        lo_raw = math.floor(self.lo * scale) - 1
        hi_raw = math.ceil(self.hi * scale) + 1
        lo_n, lo_d = self.lo.numerator, self.lo.denominator
        sp_n, sp_d = self.span.numerator, self.span.denominator
        mult = n * sp_d
        bits = (max(abs(lo_raw), abs(hi_raw)) * lo_d + abs(lo_n) * scale).bit_length() \
            + mult.bit_length()
        if bits > 62:
            if raw.dtype != object:
                obj = np.empty(raw.shape, dtype=object)
                obj.flat[:] = [int(v) for v in raw.flat]
                raw = obj
            clipped = np.minimum(np.maximum(raw, lo_raw), hi_raw)
        else:
            clipped = np.minimum(np.maximum(raw, lo_raw), hi_raw).astype(np.int64)
        numerator = (clipped * lo_d - lo_n * scale) * mult
        denominator = lo_d * sp_n * scale
        idx = numerator // denominator
        idx = np.minimum(np.maximum(idx, 0), n - 1)
        return idx.astype(np.int64)

    def lookup(self, raw: np.ndarray, frac_bits: int) -> np.ndarray:
        """Raw table entries (at the entry format) for raw inputs"""
        return self.entries[self.index(raw, frac_bits)]

    def value_at(self, index: int) -> float:
        return float(to_real(self.entries[index:index + 1], self.cfg.entry_format)[0])


@lru_cache(maxsize=64)
def build_table(function: ActivationFunction, cfg: LutConfig) -> LookupTable:
    return LookupTable(function, cfg)


def lut_error_bound(function: ActivationFunction, cfg: LutConfig,
                    lower: Optional[float] = None) -> float:
    """
    Worst-case |lut(x) - f(x)| for x inside the table domain.

    The reciprocal bound covers inputs >= ``lower`` (default 1). Its slope is
    taken at the left edge of the bin holding ``lower``, since that whole bin
    shares one entry.
    """
    lo, hi = table_domain(function, cfg.input_range)
    width = float(hi - lo) / cfg.table_size
    edge = 1.0
    if function is ActivationFunction.INV:
        edge = math.floor((1.0 if lower is None else lower) / width) * width
    slope = derivative_bound(function, cfg.input_range, edge)
    return width * slope + 2.0 ** -cfg.entry_format.frac_bits


def smallest_exp_sum(cfg_exp: LutConfig = DEFAULT_EXP_LUT) -> float:
    """Lower bound on a softmax row's exp sum: the row maximum hits the last exp entry"""
    table = build_table(ActivationFunction.EXP, cfg_exp)
    return table.value_at(cfg_exp.table_size - 1)


def softmax_tolerance(k: int, cfg_exp: LutConfig = DEFAULT_EXP_LUT,
                      cfg_inv: LutConfig = DEFAULT_INV_LUT,
                      out_fmt: FxpFormat = SOFTMAX_ENTRY_FORMAT) -> float:
    """
    Max deviation of softmax_lut from the exact softmax of its inputs.

    Valid while the sum of k exponentials stays inside the reciprocal table.
    The sum can fall just below 1, down to the largest exp entry.
    """
    delta_e = (lut_error_bound(ActivationFunction.EXP, cfg_exp)
               + math.exp(-cfg_exp.input_range))
    delta_i = lut_error_bound(ActivationFunction.INV, cfg_inv, smallest_exp_sum(cfg_exp))
    if k * delta_e >= 1:
        return math.inf
    return (delta_i * (1 + delta_e) + (k + 1) * delta_e / (1 - k * delta_e)
            + 2.0 ** -out_fmt.frac_bits)


# --- Raw tensor kernels used by the engine --------------------------------

def relu_raw(raw: np.ndarray) -> np.ndarray:
    return np.maximum(raw, 0)


def lut_raw(function: ActivationFunction, raw: np.ndarray, frac_bits: int,
            cfg: LutConfig) -> np.ndarray:
    """Table lookup returning raw entries at ``cfg.entry_format``"""
    return build_table(function, cfg).lookup(raw, frac_bits)


def direct_raw(function: ActivationFunction, raw: np.ndarray, fmt: FxpFormat,
               out_fmt: FxpFormat, policy: QuantPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Double-precision function of the real inputs, quantized into ``out_fmt``"""
    values = reference(function, to_real(raw, fmt))
    return quantize_array(values, out_fmt, policy, dtype=np.asarray(raw).dtype)


def softmax_raw(raw: np.ndarray, fmt: FxpFormat, out_fmt: FxpFormat,
                cfg_exp: LutConfig = DEFAULT_EXP_LUT, cfg_inv: LutConfig = DEFAULT_INV_LUT,
                policy: QuantPolicy = DEFAULT_POLICY) -> np.ndarray:
    """
    Row-wise table softmax over the last axis.

    The row maximum is subtracted first so the exp table only needs [-r, 0).
    The sum of the exp entries is exact at the exp entry format and indexes
    the reciprocal table; each output is exp * inv requantized to ``out_fmt``
    and clipped to 1.
    """
    raw = np.asarray(raw)
    if raw.shape[-1] == 0:
        raise DimensionError("softmax of an empty vector")
    shifted = raw - raw.max(axis=-1, keepdims=True)
    exp_tab = build_table(ActivationFunction.EXP, cfg_exp)
    inv_tab = build_table(ActivationFunction.INV, cfg_inv)
    exp_raw = exp_tab.lookup(shifted, fmt.frac_bits)
    fe = cfg_exp.entry_format.frac_bits
    total = exp_raw.sum(axis=-1, keepdims=True)
    inv_raw = inv_tab.lookup(total, fe)
    product = exp_raw * inv_raw
    out = requantize(product, fe + cfg_inv.entry_format.frac_bits, out_fmt, policy)
    one = 1 << out_fmt.frac_bits
    if out_fmt.raw_max >= one:
        out = np.minimum(out, one)
    return out


# --- Value-level operations ----------------------------------------------

def _raw_of(values: Sequence[FxpValue]) -> Tuple[np.ndarray, FxpFormat]:
    fmt = values[0].format
    if any(v.format != fmt for v in values):
        raise FormatError("all softmax inputs must share one format")
    arr = np.empty(len(values), dtype=object)
    arr[:] = [v.raw for v in values]
    return arr, fmt


def lut_eval(function: Any, x: FxpValue, cfg: LutConfig) -> FxpValue:
    """Evaluate a table function on one fixed-point value"""
    function = function if isinstance(function, ActivationFunction) else ActivationFunction(function)
    raw = np.array([x.raw], dtype=object)
    entry = lut_raw(function, raw, x.format.frac_bits, cfg)
    return FxpValue(int(entry[0]), cfg.entry_format)


def relu(x: FxpValue) -> FxpValue:
    return FxpValue(max(x.raw, 0), x.format)


def softmax_lut(v: Sequence[FxpValue], cfg_exp: LutConfig = DEFAULT_EXP_LUT,
                cfg_inv: LutConfig = DEFAULT_INV_LUT,
                out_fmt: Optional[FxpFormat] = None,
                policy: QuantPolicy = DEFAULT_POLICY) -> List[FxpValue]:
    """Table softmax of a vector of fixed-point values"""
    if len(v) == 0:
        raise DimensionError("softmax of an empty vector")
    out_fmt = out_fmt or SOFTMAX_ENTRY_FORMAT
    raw, fmt = _raw_of(v)
    out = softmax_raw(raw, fmt, out_fmt, cfg_exp, cfg_inv, policy)
    return [FxpValue(int(r), out_fmt) for r in out]


__all__ = [
    'ActivationFunction',
    'Sampling',
    'ActivationMode',
    'LutConfig',
    'DEFAULT_ENTRY_FORMAT',
    'SOFTMAX_ENTRY_FORMAT',
    'DEFAULT_SIGMOID_LUT',
    'DEFAULT_TANH_LUT',
    'DEFAULT_EXP_LUT',
    'DEFAULT_INV_LUT',
    'reference',
    'table_domain',
    'derivative_bound',
    'LookupTable',
    'build_table',
    'lut_error_bound',
    'smallest_exp_sum',
    'softmax_tolerance',
    'relu_raw',
    'lut_raw',
    'direct_raw',
    'softmax_raw',
    'lut_eval',
    'relu',
    'softmax_lut',
]
