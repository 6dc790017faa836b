"""Lookup-table activations"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.fxp import FxpFormat, quantize, to_real
from src.core.activation import (
    ActivationFunction, LutConfig, Sampling, DEFAULT_SIGMOID_LUT, DEFAULT_TANH_LUT,
    DEFAULT_EXP_LUT, DEFAULT_INV_LUT, SOFTMAX_ENTRY_FORMAT, build_table, lut_eval, lut_raw,
    lut_error_bound, relu, smallest_exp_sum, softmax_lut, softmax_tolerance, reference
)
from src.core.errors import DimensionError, FormatError

INPUT = FxpFormat.fixed(24, 5)
LEFT = LutConfig(sampling=Sampling.LEFT_EDGE)


def fx(x, fmt=INPUT):
    return quantize(x, fmt)


class TestConfig:
    @pytest.mark.parametrize("size", [0, 1, 3, 1000])
    def test_table_size_power_of_two(self, size):
        with pytest.raises(FormatError):
            LutConfig(table_size=size)

    @pytest.mark.parametrize("bound", [0.0, -1.0, math.inf])
    def test_positive_range(self, bound):
        with pytest.raises(FormatError):
            LutConfig(input_range=bound)

    def test_dict_round_trip(self):
        cfg = LutConfig(2048, 4.0, FxpFormat.fixed(20, 4), Sampling.LEFT_EDGE)
        assert LutConfig.from_dict(cfg.to_dict()) == cfg
        assert LutConfig.from_dict({"table_size": 256}).input_range == 8.0


class TestLookup:
    def test_tanh_zero_left_edge(self):
        assert lut_eval("tanh", fx(0.0), LEFT).raw == 0

    def test_sigmoid_zero(self):
        assert lut_eval("sigmoid", fx(0.0), LEFT).value == 0.5
        midpoint = float(lut_eval("sigmoid", fx(0.0), DEFAULT_SIGMOID_LUT))
        assert abs(midpoint - 0.5) <= lut_error_bound(ActivationFunction.SIGMOID, DEFAULT_SIGMOID_LUT)

    def test_clamps_to_last_bin(self):
        out = lut_eval(ActivationFunction.TANH, fx(10.0), LEFT)
        expected = quantize(math.tanh(8 - 16 / 1024), LEFT.entry_format, "nearest_even")
        assert out == expected
        low = lut_eval(ActivationFunction.TANH, fx(-10.0), LEFT)
        assert low == quantize(math.tanh(-8), LEFT.entry_format, "nearest_even")

    def test_relu(self):
        fmt = FxpFormat.fixed(16, 6)
        assert relu(quantize(-1.5, fmt)).raw == 0
        assert relu(quantize(0.0, fmt)).raw == 0
        assert relu(quantize(2.25, fmt)).value == 2.25

    def test_tanh_odd_symmetry(self):
        entries = build_table(ActivationFunction.TANH, DEFAULT_TANH_LUT).entries
        assert np.array_equal(entries, -entries[::-1])

    @pytest.mark.parametrize("function", [ActivationFunction.SIGMOID, ActivationFunction.TANH])
    def test_monotone(self, function):
        entries = build_table(function, LutConfig()).entries
        assert np.all(np.diff(entries) >= 0)

    def test_exp_monotone(self):
        assert np.all(np.diff(build_table(ActivationFunction.EXP, DEFAULT_EXP_LUT).entries) >= 0)

    @pytest.mark.parametrize("function, cfg", [
        (ActivationFunction.SIGMOID, DEFAULT_SIGMOID_LUT),
        (ActivationFunction.TANH, DEFAULT_TANH_LUT),
        (ActivationFunction.SIGMOID, LEFT),
        (ActivationFunction.TANH, LEFT),
    ])
    def test_error_bound_dense_grid(self, function, cfg):
        # 2^20 grid points covering [-8, 8) at 16 fractional bits
        frac = 16
        raw = np.arange(-8 << frac, 8 << frac, dtype=np.int64)
        entries = lut_raw(function, raw, frac, cfg)
        approx = to_real(entries, cfg.entry_format)
        exact = reference(function, np.ldexp(raw.astype(np.float64), -frac))
        assert np.max(np.abs(approx - exact)) <= lut_error_bound(function, cfg)

    def test_exp_error_bound(self):
        frac = 14
        raw = np.arange(-8 << frac, 0, dtype=np.int64)
        entries = lut_raw(ActivationFunction.EXP, raw, frac, DEFAULT_EXP_LUT)
        approx = to_real(entries, DEFAULT_EXP_LUT.entry_format)
        exact = np.exp(np.ldexp(raw.astype(np.float64), -frac))
        assert np.max(np.abs(approx - exact)) <= lut_error_bound(ActivationFunction.EXP,
                                                                DEFAULT_EXP_LUT)

    def test_inv_error_bound_below_one(self):
        # a dominant softmax row sums to the last exp entry, just under 1
        lower = smallest_exp_sum()
        assert 0.99 < lower < 1.0
        frac = SOFTMAX_ENTRY_FORMAT.frac_bits
        raw = np.arange(int(lower * 2 ** frac), 4 << frac, dtype=np.int64)
        entries = lut_raw(ActivationFunction.INV, raw, frac, DEFAULT_INV_LUT)
        approx = to_real(entries, DEFAULT_INV_LUT.entry_format)
        exact = 1.0 / np.ldexp(raw.astype(np.float64), -frac)
        bound = lut_error_bound(ActivationFunction.INV, DEFAULT_INV_LUT, lower)
        assert np.max(np.abs(approx - exact)) <= bound
        assert bound > lut_error_bound(ActivationFunction.INV, DEFAULT_INV_LUT)

    @settings(max_examples=300, deadline=None)
    @given(a=st.floats(-12, 12), b=st.floats(-12, 12))
    def test_monotone_on_values(self, a, b):
        lo, hi = sorted((a, b))
        for function in ("sigmoid", "tanh"):
            assert lut_eval(function, fx(lo), LutConfig()).raw <= lut_eval(function, fx(hi), LutConfig()).raw


class TestSoftmax:
    FMT = FxpFormat.fixed(16, 6)

    def _values(self, xs):
        return [quantize(x, self.FMT) for x in xs]

    def test_uniform(self):
        out = softmax_lut(self._values([1.5, 1.5, 1.5]))
        tol = softmax_tolerance(3)
        assert all(abs(float(v) - 1 / 3) <= tol for v in out)

    def test_dominant(self):
        out = [float(v) for v in softmax_lut(self._values([20.0, -5.0, -6.0]))]
        tol = softmax_tolerance(3)
        assert abs(out[0] - 1.0) <= tol
        assert out[1] <= tol and out[2] <= tol

    def test_random_vectors_within_tolerance(self, rng):
        tol = softmax_tolerance(5)
        for _ in range(200):
            values = self._values(rng.uniform(-4, 4, 5))
            x = np.array([float(v) for v in values])
            exact = np.exp(x - x.max()) / np.exp(x - x.max()).sum()
            out = np.array([float(v) for v in softmax_lut(values)])
            assert np.max(np.abs(out - exact)) <= tol
            assert abs(out.sum() - 1.0) <= 5 * tol

    def test_outputs_in_unit_interval(self, rng):
        for _ in range(50):
            out = softmax_lut(self._values(rng.uniform(-20, 20, 4)))
            assert all(0 <= v.value <= 1 for v in out)
            assert all(v.format == SOFTMAX_ENTRY_FORMAT for v in out)

    def test_empty(self):
        with pytest.raises(DimensionError):
            softmax_lut([])

    def test_mixed_formats_rejected(self):
        with pytest.raises(FormatError):
            softmax_lut([quantize(0.5, self.FMT), quantize(0.5, FxpFormat.fixed(8, 4))])

    def test_tolerance_is_small(self):
        assert softmax_tolerance(3, DEFAULT_EXP_LUT, DEFAULT_INV_LUT) < 0.02
