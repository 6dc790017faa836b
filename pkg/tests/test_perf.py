"""Resource, latency and throughput estimates"""

import logging
import math

import numpy as np
import pytest

from src.models import HardwareConfig, Strategy, RnnMode, PerfEstimate, DeviceBudget
from src.core.fxp import FxpFormat
from src.core.perf import (
    Calibration, DEFAULT_CALIBRATION, layer_costs, estimate_dsp, estimate_ff_lut_bram,
    step_cycles, head_cycles, estimate_latency_ii, check_budget, estimate, throughput_speedup
)
from src.core.fixtures import make_benchmark_shape, get_benchmark
from src.collectors.devices import get_device
from src.core.errors import ConfigError

from factories import random_network

W16 = FxpFormat.fixed(16, 6)


@pytest.fixture(scope="module")
def top_gru():
    return make_benchmark_shape("top_tagging", "gru")


@pytest.fixture(scope="module")
def top_lstm():
    return make_benchmark_shape("top_tagging", "lstm")


@pytest.fixture(scope="module")
def quickdraw_lstm():
    return make_benchmark_shape("quickdraw", "lstm")


def hw(reuse=(1, 1), **kwargs):
    return HardwareConfig(reuse=reuse, **kwargs)


class TestLatency:
    @pytest.mark.parametrize("reuse, cycles", [
        ((6, 5), 498), ((12, 10), 630), ((30, 20), 1026), ((60, 60), 1686),
    ])
    def test_top_gru_minimum_latency(self, top_gru, reuse, cycles):
        est = estimate(top_gru, hw(reuse), W16)
        assert est.latency_cycles_min == cycles
        assert est.ii_cycles == cycles
        assert est.latency_us_min == pytest.approx(cycles / 200.0)

    def test_top_gru_latency_strategy(self, top_gru):
        est = estimate(top_gru, hw(strategy=Strategy.LATENCY), W16)
        assert est.latency_cycles_min == est.latency_cycles_max == 348
        assert est.latency_us_min == pytest.approx(1.74)
        assert est.ii_cycles == 348
        assert abs(est.ii_cycles - 315) / 315 <= 0.15
        assert est.warnings == []
        assert est.bram == 0

    def test_band(self, top_gru):
        est = estimate(top_gru, hw((6, 5)), W16)
        assert est.latency_cycles_max == est.latency_cycles_min + 20 * 18
        custom = Calibration(band_per_step=5.0)
        assert estimate(top_gru, hw((6, 5)), W16, custom).latency_cycles_max == 498 + 100

    def test_step_and_head_cycles(self, top_gru):
        assert step_cycles(hw((6, 5))) == 24
        assert step_cycles(hw((6, 5), strategy=Strategy.LATENCY)) == 17
        assert head_cycles(top_gru, hw((6, 5))) == [8, 1, 8, 1]
        assert head_cycles(top_gru, hw(strategy=Strategy.LATENCY)) == [3, 1, 3, 1]

    @pytest.mark.parametrize("reuse, cycles, rate", [
        ((48, 32), 6753, 29616), ((384, 256), 41361, 4835),
    ])
    def test_quickdraw_lstm(self, quickdraw_lstm, reuse, cycles, rate):
        est = estimate(quickdraw_lstm, hw(reuse), W16)
        assert est.latency_cycles_min == cycles
        assert int(est.throughput_hz) == rate

    def test_quickdraw_throughput_span(self, quickdraw_lstm):
        points = get_benchmark("quickdraw").lstm_reuse_points
        rates = [estimate(quickdraw_lstm, hw(r), W16).throughput_hz for r in points]
        assert abs(min(rates) - 4300) / 4300 <= 0.20
        assert max(rates) >= 0.8 * 9700

    def test_latency_grows_with_reuse(self, top_lstm):
        cycles = [estimate(top_lstm, hw((x, y)), W16).latency_cycles_min
                  for x, y in [(1, 1), (6, 5), (12, 10), (30, 20), (60, 40)]]
        assert cycles == sorted(cycles)


class TestResources:
    def test_lstm_dsp(self, top_lstm):
        assert layer_costs(top_lstm, hw((6, 5)), W16)[0].dsp == 400
        assert layer_costs(top_lstm, hw((6, 5)), FxpFormat.fixed(20, 6))[0].dsp == 800

    def test_dsp_input_width(self, top_lstm):
        wide = hw((6, 5), dsp_input_width=24)
        assert layer_costs(top_lstm, wide, FxpFormat.fixed(20, 6))[0].dsp == 400

    @pytest.mark.parametrize("reuse", [(1, 1), (48, 32)])
    def test_gru_lstm_dsp_ratio(self, reuse):
        gru = layer_costs(make_benchmark_shape("quickdraw", "gru"), hw(reuse), W16)[0].dsp
        lstm = layer_costs(make_benchmark_shape("quickdraw", "lstm"), hw(reuse), W16)[0].dsp
        assert gru / lstm == 0.75

    def test_dsp_falls_with_reuse(self, top_gru):
        dsp = [estimate_dsp(top_gru, hw(r), W16) for r in [(1, 1), (6, 5), (12, 10), (30, 20)]]
        assert dsp == sorted(dsp, reverse=True)
        assert estimate_dsp(top_gru, hw((6, 5)), W16) >= estimate_dsp(top_gru, hw((6, 20)), W16)

    def test_ff_lut_fall_with_reuse(self, top_lstm):
        low = estimate_ff_lut_bram(top_lstm, hw((1, 1)), W16)
        high = estimate_ff_lut_bram(top_lstm, hw((30, 20)), W16)
        assert high[0] < low[0] and high[1] < low[1]

    def test_flavor_lstm_bram(self):
        model = make_benchmark_shape("flavor_tagging", "lstm")
        assert layer_costs(model, hw((48, 40)), W16)[0].bram == math.ceil(60960 * 16 / 36864) == 27

    def test_latency_strategy_uses_full_unroll(self, top_lstm):
        unrolled = estimate(top_lstm, hw((1, 1)), W16)
        latency = estimate(top_lstm, hw((30, 20), strategy=Strategy.LATENCY), W16)
        assert latency.dsp == unrolled.dsp
        assert latency.bram == 0

    def test_vivado_correction(self, top_gru):
        raw = estimate(top_gru, hw((6, 5)), W16)
        costs = layer_costs(top_gru, hw((6, 5)), W16)
        corrected = estimate(top_gru, hw((6, 5)), W16, vivado_correction=True)
        assert corrected.ff == round(sum(c.ff for c in costs) * 0.85)
        assert corrected.lut == round(sum(c.lut for c in costs) * 0.575)
        assert corrected.dsp == raw.dsp and corrected.bram == raw.bram

    def test_layer_breakdown_sums(self, top_lstm):
        est = estimate(top_lstm, hw((6, 5)), W16)
        assert sum(c.dsp for c in est.layers) == est.dsp
        assert [c.name for c in est.layers][0] == "lstm"
        assert est.layers[0].latency_cycles == 20 * 24
        assert sum(c.latency_cycles for c in est.layers) == est.latency_cycles_min


class TestModes:
    def test_non_static_replicates_recurrent_block(self, top_gru):
        static = layer_costs(top_gru, hw((6, 5)), W16)
        non_static = layer_costs(top_gru, hw((6, 5), mode=RnnMode.NON_STATIC), W16)
        assert non_static[0].dsp == 20 * static[0].dsp
        assert non_static[0].ff == pytest.approx(20 * static[0].ff)
        assert [c.dsp for c in non_static[1:]] == [c.dsp for c in static[1:]]

    def test_non_static_ii(self, top_gru):
        static = estimate(top_gru, hw((6, 5)), W16)
        resource = estimate(top_gru, hw((6, 5), mode=RnnMode.NON_STATIC), W16)
        pipelined = estimate(top_gru, hw(strategy=Strategy.LATENCY, mode=RnnMode.NON_STATIC), W16)
        assert resource.latency_cycles_min == static.latency_cycles_min
        assert resource.ii_cycles == 24
        assert pipelined.ii_cycles == 1
        assert throughput_speedup(static, resource) == pytest.approx(498 / 24)

    def test_single_step_schedules_agree(self):
        model = random_network(np.random.default_rng(0), seq_len=1)
        static = estimate_latency_ii(model, hw((2, 2)), W16)
        non_static = estimate_latency_ii(model, hw((2, 2), mode=RnnMode.NON_STATIC), W16)
        assert static == non_static

    @pytest.mark.parametrize("mode", list(RnnMode))
    @pytest.mark.parametrize("strategy", list(Strategy))
    def test_throughput_times_ii_is_clock(self, quickdraw_lstm, mode, strategy):
        est = estimate(quickdraw_lstm, hw((96, 64), strategy=strategy, mode=mode, clock_mhz=250.0),
                       W16)
        assert est.throughput_hz * est.ii_cycles == pytest.approx(250e6, rel=1e-12)


class TestWarningsAndBudgets:
    def test_large_latency_design_warns(self, quickdraw_lstm, caplog):
        with caplog.at_level(logging.WARNING):
            est = estimate(quickdraw_lstm, hw(strategy=Strategy.LATENCY), W16)
        assert len(est.warnings) == 1
        assert "latency strategy" in caplog.text

    def test_resource_design_does_not_warn(self, quickdraw_lstm):
        assert estimate(quickdraw_lstm, hw((48, 32)), W16).warnings == []

    def _point(self, **resources):
        values = {"dsp": 0, "ff": 0, "lut": 0, "bram": 0}
        values.update(resources)
        return PerfEstimate(latency_cycles_min=1, latency_cycles_max=1, ii_cycles=1,
                            clock_mhz=200.0, **values)

    def test_zero_fits(self):
        report = check_budget(self._point(), get_device("xcku115"))
        assert report.fits_all

    def test_equal_fits(self):
        budget = DeviceBudget("part", dsp=10, ff=20, lut=30, bram=4)
        report = check_budget(self._point(dsp=10, ff=20, lut=30, bram=4), budget)
        assert report.fits_all
        assert report.utilization["dsp"] == 1.0

    def test_over_budget(self):
        report = check_budget(self._point(dsp=5600), get_device("xcku115-flvb2104-2-i"))
        assert report.fits["dsp"] is False
        assert report.fits["lut"] is True
        assert not report.fits_all
        assert report.to_dict()["fits_all"] is False

    def test_estimate_records_device_fit(self, top_gru):
        est = estimate(top_gru, hw((6, 5), device=get_device("ku115")), W16)
        assert est.fits_device == {"dsp": True, "ff": True, "lut": True, "bram": True}


class TestCalibration:
    def test_defaults(self):
        assert DEFAULT_CALIBRATION.band == DEFAULT_CALIBRATION.c0 == 18.0
        assert Calibration.from_dict(DEFAULT_CALIBRATION.to_dict()) == DEFAULT_CALIBRATION

    def test_unknown_keys(self):
        with pytest.raises(ConfigError, match="unknown calibration keys"):
            Calibration.from_dict({"c0": 10, "c9": 1})

    def test_override_changes_latency(self, top_gru):
        cal = Calibration(c0=10.0)
        assert estimate(top_gru, hw((6, 5)), W16, cal).latency_cycles_min == 20 * 16 + 18

    @pytest.mark.parametrize("reuse", [(0, 1), (1, 0)])
    def test_reuse_must_be_positive(self, reuse):
        with pytest.raises(ConfigError):
            HardwareConfig(reuse=reuse)
