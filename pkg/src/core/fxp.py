"""
RnnHlsProfiler - Fixed-Point Arithmetic
Deterministic fixed-point formats, values and array kernels with
configurable rounding and overflow handling
"""

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Union
import math
import re

import numpy as np

from .errors import FormatError, QuantizationError

Real = Union[int, float, Fraction, Decimal]

MAX_TOTAL_BITS = 64

# Largest accumulator (in bits, sign included) kept in int64 arrays
_INT64_SAFE_BITS = 62

_FORMAT_RE = re.compile(r'^\s*(ap_)?(u?)fixed\s*<\s*(\d+)\s*,\s*(-?\d+)\s*>\s*$')


class Rounding(Enum):
    """Rounding applied when fractional bits are dropped"""
    TRUNCATE = "truncate"
    NEAREST_EVEN = "nearest_even"

    @classmethod
    def parse(cls, text: Union[str, 'Rounding']) -> 'Rounding':
        if isinstance(text, Rounding):
            return text
        key = str(text).strip().lower().replace('-', '_')
        aliases = {
            'truncate': cls.TRUNCATE, 'trn': cls.TRUNCATE, 'floor': cls.TRUNCATE,
            'nearest_even': cls.NEAREST_EVEN, 'round': cls.NEAREST_EVEN,
            'rne': cls.NEAREST_EVEN, 'rnd_conv': cls.NEAREST_EVEN,
            'round_to_nearest_even': cls.NEAREST_EVEN,
        }
        if key not in aliases:
            raise FormatError(f"unknown rounding mode '{text}'")
        return aliases[key]


class Overflow(Enum):
    """Handling of values outside the representable range"""
    SATURATE = "saturate"
    WRAP = "wrap"

    @classmethod
    def parse(cls, text: Union[str, 'Overflow']) -> 'Overflow':
        if isinstance(text, Overflow):
            return text
        key = str(text).strip().lower()
        aliases = {'saturate': cls.SATURATE, 'sat': cls.SATURATE,
                   'wrap': cls.WRAP, 'wrap_around': cls.WRAP}
        if key not in aliases:
            raise FormatError(f"unknown overflow mode '{text}'")
        return aliases[key]


@dataclass(frozen=True)
class QuantPolicy:
    """Rounding and overflow pair applied at every quantization point"""
    rounding: Rounding = Rounding.TRUNCATE
    overflow: Overflow = Overflow.SATURATE


DEFAULT_POLICY = QuantPolicy()


@dataclass(frozen=True)
class FxpFormat:
    """
    Fixed-point number format.

    ``integer_bits`` includes the sign bit for signed formats, so
    ``fixed<16,6>`` has 10 fractional bits and spans [-32, 32).
    """
    signed: bool
    total_bits: int
    integer_bits: int

    def __post_init__(self):
        if isinstance(self.total_bits, bool) or not isinstance(self.total_bits, int):
            raise FormatError(f"total bits must be an integer, got {self.total_bits!r}")
        if isinstance(self.integer_bits, bool) or not isinstance(self.integer_bits, int):
            raise FormatError(f"integer bits must be an integer, got {self.integer_bits!r}")
        if not 1 <= self.total_bits <= MAX_TOTAL_BITS:
            raise FormatError(
                f"total bits must be in 1..{MAX_TOTAL_BITS}, got {self.total_bits}")
        if not 0 <= self.integer_bits <= self.total_bits:
            raise FormatError(
                f"integer bits must be in 0..{self.total_bits}, got {self.integer_bits}")

    @classmethod
    def parse(cls, text: str) -> 'FxpFormat':
        """Parse ``fixed<W,I>`` / ``ufixed<W,I>`` (``ap_`` prefix accepted)"""
        match = _FORMAT_RE.match(text or "")
        if not match:
            raise FormatError(f"cannot parse fixed-point format '{text}'")
        _, unsigned, width, integer = match.groups()
        return cls(signed=not unsigned, total_bits=int(width), integer_bits=int(integer))

    @classmethod
    def fixed(cls, total_bits: int, integer_bits: int) -> 'FxpFormat':
        return cls(True, total_bits, integer_bits)

    @classmethod
    def ufixed(cls, total_bits: int, integer_bits: int) -> 'FxpFormat':
        return cls(False, total_bits, integer_bits)

    @property
    def frac_bits(self) -> int:
        return self.total_bits - self.integer_bits

    @property
    def step(self) -> Fraction:
        """Granularity, exactly 2^-F"""
        return Fraction(1, 1 << self.frac_bits)

    @property
    def raw_min(self) -> int:
        return -(1 << (self.total_bits - 1)) if self.signed else 0

    @property
    def raw_max(self) -> int:
        return (1 << (self.total_bits - 1)) - 1 if self.signed else (1 << self.total_bits) - 1

    @property
    def min_value(self) -> Fraction:
        return Fraction(self.raw_min, 1 << self.frac_bits)

    @property
    def max_value(self) -> Fraction:
        return Fraction(self.raw_max, 1 << self.frac_bits)

    def contains_raw(self, raw: int) -> bool:
        return self.raw_min <= raw <= self.raw_max

    def with_integer_bits(self, integer_bits: int) -> 'FxpFormat':
        return FxpFormat(self.signed, self.total_bits, integer_bits)

    def __str__(self) -> str:
        prefix = "fixed" if self.signed else "ufixed"
        return f"{prefix}<{self.total_bits},{self.integer_bits}>"


@dataclass(frozen=True)
class FxpValue:
    """A value stored under a fixed-point format: real value == raw * 2^-F"""
    raw: int
    format: FxpFormat

    def __post_init__(self):
        if not self.format.contains_raw(self.raw):
            raise FormatError(
                f"raw value {self.raw} outside {self.format} range "
                f"[{self.format.raw_min}, {self.format.raw_max}]")

    @property
    def value(self) -> Fraction:
        return Fraction(self.raw, 1 << self.format.frac_bits)

    def __float__(self) -> float:
        return self.raw / float(1 << self.format.frac_bits)

    def __repr__(self) -> str:
        return f"FxpValue({float(self)!r}, {self.format})"


def _to_fraction(x: Real) -> Fraction:
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Fraction(x)
    try:
        if not math.isfinite(float(x)):
            raise QuantizationError("non-finite input")
    except OverflowError:
        pass
    try:
        return Fraction(x)
    except (ValueError, OverflowError, TypeError):
        raise QuantizationError("non-finite input")


def _shift_scalar(value: int, shift: int, rounding: Rounding) -> int:
    """Divide by 2^shift (multiply when negative) with the given rounding"""
    if shift <= 0:
        return value << -shift
    q = value >> shift
    if rounding is Rounding.NEAREST_EVEN:
        rem = value - (q << shift)
        half = 1 << (shift - 1)
        if rem > half or (rem == half and q & 1):
            q += 1
    return q


def _fit_scalar(raw: int, fmt: FxpFormat, overflow: Overflow) -> int:
    if fmt.contains_raw(raw):
        return raw
    if overflow is Overflow.SATURATE:
        return fmt.raw_max if raw > fmt.raw_max else fmt.raw_min
    span = 1 << fmt.total_bits
    return (raw - fmt.raw_min) % span + fmt.raw_min


def _check_format(fmt: Any) -> FxpFormat:
    if not isinstance(fmt, FxpFormat):
        raise FormatError(f"expected an FxpFormat, got {type(fmt).__name__}")
    return fmt


def quantize(x: Real, fmt: FxpFormat, rounding: Optional[Rounding] = None,
             overflow: Optional[Overflow] = None) -> FxpValue:
    """Represent a finite real number in ``fmt``"""
    fmt = _check_format(fmt)
    rounding = Rounding.parse(rounding) if rounding is not None else DEFAULT_POLICY.rounding
    overflow = Overflow.parse(overflow) if overflow is not None else DEFAULT_POLICY.overflow
    scaled = _to_fraction(x) * (1 << fmt.frac_bits)
    if rounding is Rounding.TRUNCATE:
        raw = math.floor(scaled)
    else:
        raw = round(scaled)  # Fraction.__round__ is half-to-even
    return FxpValue(_fit_scalar(raw, fmt, overflow), fmt)


def requantize_value(raw: int, frac_bits: int, out_fmt: FxpFormat,
                     policy: QuantPolicy = DEFAULT_POLICY) -> FxpValue:
    """Quantize an exact raw value held at ``frac_bits`` into ``out_fmt``"""
    out_fmt = _check_format(out_fmt)
    shifted = _shift_scalar(raw, frac_bits - out_fmt.frac_bits, policy.rounding)
    return FxpValue(_fit_scalar(shifted, out_fmt, policy.overflow), out_fmt)


def fxp_add(a: FxpValue, b: FxpValue, out_fmt: FxpFormat,
            policy: QuantPolicy = DEFAULT_POLICY) -> FxpValue:
    frac = max(a.format.frac_bits, b.format.frac_bits)
    total = (a.raw << (frac - a.format.frac_bits)) + (b.raw << (frac - b.format.frac_bits))
    return requantize_value(total, frac, out_fmt, policy)


def fxp_sub(a: FxpValue, b: FxpValue, out_fmt: FxpFormat,
            policy: QuantPolicy = DEFAULT_POLICY) -> FxpValue:
    frac = max(a.format.frac_bits, b.format.frac_bits)
    total = (a.raw << (frac - a.format.frac_bits)) - (b.raw << (frac - b.format.frac_bits))
    return requantize_value(total, frac, out_fmt, policy)


def fxp_mul(a: FxpValue, b: FxpValue, out_fmt: FxpFormat,
            policy: QuantPolicy = DEFAULT_POLICY) -> FxpValue:
    product = a.raw * b.raw
    return requantize_value(product, a.format.frac_bits + b.format.frac_bits, out_fmt, policy)


# --- Array kernels -------------------------------------------------------
#
# Raw tensors are numpy arrays of integers. int64 is used whenever the widest
# intermediate fits; otherwise dtype=object arrays hold Python ints so every
# width up to 64 bits stays exact.

def accumulator_bits(fmt: FxpFormat, fan_in: int) -> int:
    """Width of an exact dot-product accumulator: 2W + ceil(log2(n))"""
    return 2 * fmt.total_bits + max(0, math.ceil(math.log2(max(fan_in, 1))))


def raw_dtype(fmt: FxpFormat, fan_in: int = 1) -> Any:
    """int64 when the accumulator (plus headroom for a bias) fits, else object"""
    if accumulator_bits(fmt, fan_in + 1) + 1 <= _INT64_SAFE_BITS:
        return np.int64
    return object


def _as_dtype(arr: np.ndarray, dtype: Any) -> np.ndarray:
    if dtype is object:
        if arr.dtype == object:
            return arr
        out = np.empty(arr.shape, dtype=object)
        out.flat[:] = [int(v) for v in arr.flat]
        return out
    return arr.astype(np.int64)


def shift_round(raw: np.ndarray, shift: int, rounding: Rounding) -> np.ndarray:
    """Array version of a rounding right shift (left shift when negative)"""
    if shift == 0:
        return raw
    if shift < 0:
        return raw << -shift
    q = raw >> shift
    if rounding is Rounding.TRUNCATE:
        return q
    rem = raw - (q << shift)
    half = 1 << (shift - 1)
    round_up = (rem > half) | ((rem == half) & ((q & 1) == 1))
    return np.where(round_up, q + 1, q)


def fit_raw(raw: np.ndarray, fmt: FxpFormat, overflow: Overflow) -> np.ndarray:
    """Bring raw values into range by saturation or two's-complement wrap"""
    lo, hi = fmt.raw_min, fmt.raw_max
    if overflow is Overflow.SATURATE:
        return np.minimum(np.maximum(raw, lo), hi)
    span = 1 << fmt.total_bits
    if raw.dtype != object and span > (1 << 62):
        raw = _as_dtype(raw, object)
    return (raw - lo) % span + lo


def requantize(raw: np.ndarray, frac_bits: int, fmt: FxpFormat,
               policy: QuantPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Quantize exact raw values held at ``frac_bits`` into ``fmt``"""
    shifted = shift_round(np.asarray(raw), frac_bits - fmt.frac_bits, policy.rounding)
    return fit_raw(shifted, fmt, policy.overflow)


def quantize_array(x: Any, fmt: FxpFormat, policy: QuantPolicy = DEFAULT_POLICY,
                   dtype: Any = None) -> np.ndarray:
    """
    Quantize an array of reals to raw integers.

    Scaling a double by a power of two is exact, so floor/rint on the scaled
    value gives the same raw integer as an exact rational computation.
    """
    values = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise QuantizationError("non-finite input")
    scaled = np.ldexp(values, fmt.frac_bits)
    if policy.rounding is Rounding.TRUNCATE:
        scaled = np.floor(scaled)
    else:
        scaled = np.rint(scaled)
    if dtype is None:
        dtype = np.int64 if fmt.total_bits <= _INT64_SAFE_BITS else object
    if dtype is object or (scaled.size and np.max(np.abs(scaled)) >= 2.0 ** _INT64_SAFE_BITS):
        ints = np.empty(scaled.shape, dtype=object)
        ints.flat[:] = [int(v) for v in scaled.flat]
    else:
        ints = scaled.astype(np.int64)
    fitted = fit_raw(ints, fmt, policy.overflow)
    return _as_dtype(fitted, dtype)


def to_real(raw: np.ndarray, fmt: FxpFormat) -> np.ndarray:
    """Raw integers to float64 real values"""
    arr = np.asarray(raw)
    if arr.dtype == object:
        return np.array([math.ldexp(int(v), -fmt.frac_bits) for v in arr.flat],
                        dtype=np.float64).reshape(arr.shape)
    return np.ldexp(arr.astype(np.float64), -fmt.frac_bits)


def to_values(raw: np.ndarray, fmt: FxpFormat) -> list:
    """Raw integers (1-D) to a list of FxpValue"""
    return [FxpValue(int(v), fmt) for v in np.asarray(raw).ravel()]


def from_values(values: Any, fmt: FxpFormat, policy: QuantPolicy = DEFAULT_POLICY,
                dtype: Any = None) -> np.ndarray:
    """
    Accept FxpValue sequences or reals and return raw integers in ``fmt``.
    FxpValues in another format are requantized exactly.
    """
    items = list(values) if not isinstance(values, np.ndarray) else None
    if items is not None and items and all(isinstance(v, FxpValue) for v in items):
        raws = [requantize_value(v.raw, v.format.frac_bits, fmt, policy).raw for v in items]
        arr = np.empty(len(raws), dtype=object)
        arr[:] = raws
        return _as_dtype(arr, dtype or (np.int64 if fmt.total_bits <= _INT64_SAFE_BITS else object))
    return quantize_array(values if items is None else np.asarray(items, dtype=np.float64),
                          fmt, policy, dtype)


__all__ = [
    'Rounding',
    'Overflow',
    'QuantPolicy',
    'DEFAULT_POLICY',
    'FxpFormat',
    'FxpValue',
    'quantize',
    'requantize_value',
    'fxp_add',
    'fxp_sub',
    'fxp_mul',
    'accumulator_bits',
    'raw_dtype',
    'shift_round',
    'fit_raw',
    'requantize',
    'quantize_array',
    'to_real',
    'to_values',
    'from_values',
]
