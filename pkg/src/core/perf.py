"""
RnnHlsProfiler - Performance Estimator
First-order FPGA resource, latency, initiation interval and throughput
model for recurrent networks under a reuse/strategy/mode configuration
"""

from dataclasses import dataclass, asdict, fields
from typing import Any, Dict, List, Optional, Tuple
import logging
import math

from ..models import (
    NetworkModel, LayerKind, HardwareConfig, Strategy, RnnMode, DeviceBudget,
    LayerCost, PerfEstimate, BudgetReport
)
from .fxp import FxpFormat
from .analysis import count_multiplies, count_parameters, layer_name
from .errors import ConfigError

RESOURCES = ('dsp', 'ff', 'lut', 'bram')


@dataclass(frozen=True)
class Calibration:
    """
    Constants of the estimator.

    Per-step latency under the resource strategy is c0 + c1 * max(X, Y)
    cycles. The defaults fit the top-tagging GRU minimum latencies; every
    value can be overridden from the calibration sidecar.
    """
    c0: float = 18.0
    c1: float = 1.0
    l_pipe: int = 17
    head_c0: int = 2
    act_cycles: int = 1
    band_per_step: Optional[float] = None  # None: same as c0
    a_ff: float = 1.0
    a_lut: float = 1.2
    table_bits_per_lut: int = 64
    bram_block_bits: int = 36864
    latency_param_threshold: int = 40000
    vivado_lut_factor: float = 0.575
    vivado_ff_factor: float = 0.85

    @property
    def band(self) -> float:
        return self.c0 if self.band_per_step is None else self.band_per_step

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Calibration':
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown calibration keys: {', '.join(sorted(unknown))}")
        return cls(**data)


DEFAULT_CALIBRATION = Calibration()


def _cal(calibration: Optional[Calibration]) -> Calibration:
    return calibration or DEFAULT_CALIBRATION


def _effective_reuse(hw: HardwareConfig) -> Tuple[int, int]:
    # The latency strategy unrolls every multiplication
    if hw.strategy is Strategy.LATENCY:
        return 1, 1
    return hw.kernel_reuse, hw.recurrent_reuse


def _dsp_factor(hw: HardwareConfig, precision: FxpFormat) -> int:
    return 2 if precision.total_bits > hw.dsp_input_width else 1


def _replicas(model: NetworkModel, hw: HardwareConfig) -> int:
    """Copies of the recurrent block in hardware"""
    if hw.mode is RnnMode.NON_STATIC:
        return model.seq_len
    return 1


def _table_bits(entries: int, width: int) -> int:
    return entries * width


def layer_costs(model: NetworkModel, hw: HardwareConfig, precision: FxpFormat,
                calibration: Optional[Calibration] = None) -> List[LayerCost]:
    """Per-layer resource breakdown (latency cycles filled by estimate_latency_ii)"""
    cal = _cal(calibration)
    x_reuse, y_reuse = _effective_reuse(hw)
    factor = _dsp_factor(hw, precision)
    width = precision.total_bits
    replicas = _replicas(model, hw)
    mults = count_multiplies(model)
    params = count_parameters(model)
    costs = []

    for index, layer in enumerate(model.layers):
        spec = layer.spec
        name = layer_name(layer, index)
        cost = LayerCost(name=name, kind=spec.kind.value)
        m = mults[index]
        weight_bits = params.layers[index].parameters * width

        if spec.kind.is_recurrent:
            dsp = math.ceil(m.kernel_mults_per_step / x_reuse) \
                + math.ceil(m.recurrent_mults_per_step / y_reuse)
            mult_term = width * (m.kernel_mults_per_step / x_reuse
                                 + m.recurrent_mults_per_step / y_reuse)
            state_regs = 2 if spec.kind is LayerKind.LSTM else 1
            state_bits = width * spec.output_dim * state_regs
            # One sigmoid and one tanh table per block
            tables = 2 * _table_bits(1024, width) / cal.table_bits_per_lut
            cost.dsp = factor * dsp * replicas
            cost.ff = (cal.a_ff * mult_term + state_bits) * replicas
            cost.lut = (cal.a_lut * mult_term + tables) * replicas
            cost.ff_fixed = state_bits * replicas
            cost.lut_fixed = tables * replicas
            cost.weight_bits = weight_bits * replicas
        elif spec.kind is LayerKind.DENSE:
            mult_term = width * m.dense_mults / x_reuse
            cost.dsp = factor * math.ceil(m.dense_mults / x_reuse)
            cost.ff = cal.a_ff * mult_term + width * spec.output_dim
            cost.lut = cal.a_lut * mult_term
            cost.ff_fixed = width * spec.output_dim
            cost.weight_bits = weight_bits
        elif spec.kind in (LayerKind.SIGMOID, LayerKind.TANH):
            cost.lut = cost.lut_fixed = _table_bits(1024, width) / cal.table_bits_per_lut
        elif spec.kind is LayerKind.SOFTMAX:
            cost.lut = cost.lut_fixed = 2 * _table_bits(4096, 18) / cal.table_bits_per_lut
        elif spec.kind is LayerKind.RELU:
            cost.lut = cost.lut_fixed = float(spec.output_dim)

        if hw.strategy is Strategy.RESOURCE and cost.weight_bits:
            cost.bram = math.ceil(cost.weight_bits / cal.bram_block_bits)
        costs.append(cost)
    return costs


def estimate_dsp(model: NetworkModel, hw: HardwareConfig, precision: FxpFormat,
                 calibration: Optional[Calibration] = None) -> int:
    """
    DSP count: ceil(kernel mults / X) + ceil(recurrent mults / Y) per recurrent
    layer, ceil(mults / X) per dense layer, doubled above the DSP input width.
    """
    return sum(c.dsp for c in layer_costs(model, hw, precision, calibration))


def estimate_ff_lut_bram(model: NetworkModel, hw: HardwareConfig, precision: FxpFormat,
                         calibration: Optional[Calibration] = None) -> Tuple[int, int, int]:
    costs = layer_costs(model, hw, precision, calibration)
    ff = int(round(sum(c.ff for c in costs)))
    lut = int(round(sum(c.lut for c in costs)))
    bram = sum(c.bram for c in costs)
    return ff, lut, bram


def step_cycles(hw: HardwareConfig, calibration: Optional[Calibration] = None) -> int:
    """Latency of one recurrent step"""
    cal = _cal(calibration)
    if hw.strategy is Strategy.LATENCY:
        return cal.l_pipe
    return int(math.ceil(cal.c0 + cal.c1 * max(hw.kernel_reuse, hw.recurrent_reuse)))


def head_cycles(model: NetworkModel, hw: HardwareConfig,
                calibration: Optional[Calibration] = None) -> List[int]:
    """Latency of each layer after the recurrent layer"""
    cal = _cal(calibration)
    cycles = []
    mults = count_multiplies(model)
    offset = len(model.layers) - len(model.head_layers)
    for index, layer in enumerate(model.head_layers):
        if layer.kind is LayerKind.DENSE:
            dense = mults[index + offset].dense_mults
            if hw.strategy is Strategy.LATENCY:
                cycles.append(cal.head_c0 + 1)
            else:
                cycles.append(cal.head_c0 + min(hw.kernel_reuse, dense))
        else:
            cycles.append(cal.act_cycles)
    return cycles


def estimate_latency_ii(model: NetworkModel, hw: HardwareConfig, precision: FxpFormat,
                        calibration: Optional[Calibration] = None) -> Tuple[int, int, int]:
    """
    (latency_cycles_min, latency_cycles_max, ii_cycles).

    Static mode holds the state inside one block, so the next inference
    starts only after the whole sequence: II equals the minimum latency.
    Non-static mode accepts a new inference every step (every cycle when the
    step block is fully pipelined under the latency strategy). With a single
    timestep both schedules are the same design.
    """
    cal = _cal(calibration)
    steps = model.seq_len if model.recurrent_layer is not None else 0
    step = step_cycles(hw, cal)
    head = sum(head_cycles(model, hw, cal))
    latency_min = steps * step + head
    if hw.strategy is Strategy.LATENCY:
        latency_max = latency_min
    else:
        latency_max = latency_min + int(math.ceil(steps * cal.band))

    if hw.mode is RnnMode.NON_STATIC and steps > 1:
        ii = 1 if hw.strategy is Strategy.LATENCY else step
    else:
        ii = latency_min
    return latency_min, latency_max, max(ii, 1)


def check_budget(est: Any, budget: DeviceBudget) -> BudgetReport:
    """Compare each resource of an estimate against a device budget (<= fits)"""
    report = BudgetReport(device=budget.name)
    for resource in RESOURCES:
        used = getattr(est, resource)
        available = getattr(budget, resource)
        report.fits[resource] = used <= available
        report.utilization[resource] = used / available if available else math.inf
    if not report.fits_all:
        over = [r for r in RESOURCES if not report.fits[r]]
        logging.warning(f"Estimate exceeds {budget.name} budget for: {', '.join(over)}")
    return report


def estimate(model: NetworkModel, hw: HardwareConfig, precision: FxpFormat,
             calibration: Optional[Calibration] = None,
             vivado_correction: bool = False) -> PerfEstimate:
    """Full estimate: resources, latency band, II, throughput and device fit"""
    cal = _cal(calibration)
    costs = layer_costs(model, hw, precision, cal)
    ff = sum(c.ff for c in costs)
    lut = sum(c.lut for c in costs)
    if vivado_correction:
        ff *= cal.vivado_ff_factor
        lut *= cal.vivado_lut_factor
    latency_min, latency_max, ii = estimate_latency_ii(model, hw, precision, cal)

    step = step_cycles(hw, cal)
    heads = head_cycles(model, hw, cal)
    offset = len(model.layers) - len(model.head_layers)
    for index, cost in enumerate(costs):
        if index < offset:
            cost.latency_cycles = model.seq_len * step
        else:
            cost.latency_cycles = heads[index - offset]

    result = PerfEstimate(
        dsp=sum(c.dsp for c in costs),
        ff=int(round(ff)),
        lut=int(round(lut)),
        bram=sum(c.bram for c in costs),
        latency_cycles_min=latency_min,
        latency_cycles_max=latency_max,
        ii_cycles=ii,
        clock_mhz=hw.clock_mhz,
        step_cycles=step if model.recurrent_layer is not None else 0,
        head_cycles=sum(heads),
        layers=costs,
    )

    params = count_parameters(model).total
    if hw.strategy is Strategy.LATENCY and params >= cal.latency_param_threshold:
        message = (f"latency strategy requested for {params} trainable parameters "
                   f"(threshold {cal.latency_param_threshold}); synthesis may not be feasible")
        logging.warning(message)
        result.warnings.append(message)

    if hw.device is not None:
        result.fits_device = dict(check_budget(result, hw.device).fits)
    return result


def throughput_speedup(baseline: PerfEstimate, other: PerfEstimate) -> float:
    """How many times more inferences per second ``other`` sustains"""
    return other.throughput_hz / baseline.throughput_hz


__all__ = [
    'RESOURCES',
    'Calibration',
    'DEFAULT_CALIBRATION',
    'layer_costs',
    'estimate_dsp',
    'estimate_ff_lut_bram',
    'step_cycles',
    'head_cycles',
    'estimate_latency_ii',
    'check_budget',
    'estimate',
    'throughput_speedup',
]
