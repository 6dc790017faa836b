"""
RnnHlsProfiler - Command Line Driver
Subcommands for inference, quantization and reuse sweeps, schedule
comparison, single estimates and fixture generation
"""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence
import argparse
import logging
import sys

import numpy as np

from ..models import NetworkModel, HardwareConfig, RnnMode, Strategy, ScoredDataset
from .fxp import FxpFormat, QuantPolicy, Rounding, Overflow
from .activation import ActivationMode
from .engine import EngineConfig, InferenceEngine
from .metrics import one_vs_rest_auc, accuracy
from .perf import estimate
from .fixtures import DEFAULT_SEED, make_benchmark_shape, write_fixtures
from .sweeps import (
    DEFAULT_INTEGER_BITS, default_workers, parse_reuse, parse_int_list,
    sweep_quant, sweep_reuse, compare_modes
)
from .errors import RnnHlsError, ConfigError, MetricError
from ..collectors.weights import load_model
from ..collectors.datasets import load_dataset
from ..collectors.devices import get_device, load_calibration
from ..reports.writers import ReportWriter, scores_report
from ..utils.cli import ConsoleUI, create_default_ui
from ..utils.config import load_structured_file, config_for_command

__version__ = "1.0.0"

PROG = "rnnhls"

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_INTERRUPTED = 130

COMMANDS = ('infer', 'sweep-quant', 'sweep-reuse', 'compare-modes', 'estimate', 'gen-fixtures')

# Values used when neither the command line nor the config file sets an option
DEFAULTS: Dict[str, Dict[str, Any]] = {
    '*': {
        'precision': 'fixed<16,6>', 'mode': 'static', 'rounding': 'truncate',
        'overflow': 'saturate', 'activation_mode': 'lut', 'workers': 1,
        'strategy': 'resource', 'clock': 200.0, 'reuse': '1:1', 'cell': 'lstm',
        'vivado': False, 'calibration': None, 'device': None, 'output': None,
        'summary': None, 'model': None, 'data': None, 'benchmark': None,
        'verbose': False, 'no_color': False,
    },
    'sweep-quant': {'integer_bits': ','.join(str(i) for i in DEFAULT_INTEGER_BITS),
                    'frac_bits': '2..16'},
    'sweep-reuse': {'reuse': ['1:1'], 'widths': '16', 'integer_bits': 6},
    'gen-fixtures': {'output_dir': 'fixtures', 'seed': DEFAULT_SEED, 'samples': 2000,
                     'benchmarks': None},
}

DATASET_HELP = (
    "dataset file: CSV with header 'label,t0_f0,t0_f1,...' (row-major flattened "
    "sequence, one sample per row) or JSON {\"labels\": [...], \"x\": [[[...]]]}"
)


# --- Parser -------------------------------------------------------------------

def _add_numeric_options(p: argparse.ArgumentParser, precision: bool = True):
    if precision:
        p.add_argument('--precision', help="working precision, e.g. 'fixed<16,6>' (default)")
    p.add_argument('--rounding', choices=['truncate', 'nearest_even'],
                   help="rounding at every quantization point (default: truncate)")
    p.add_argument('--overflow', choices=['saturate', 'wrap'],
                   help="overflow handling (default: saturate)")
    p.add_argument('--activation-mode', choices=['lut', 'direct'],
                   help="table lookup (default) or directly evaluated activations")
    p.add_argument('--mode', choices=['static', 'non_static'],
                   help="sequence schedule of the recurrent block (default: static)")


def _add_model_options(p: argparse.ArgumentParser, allow_benchmark: bool = False):
    p.add_argument('--model', '-m', help="model JSON file")
    if allow_benchmark:
        p.add_argument('--benchmark', help="use a benchmark shape instead of --model "
                                           "(top_tagging, flavor_tagging, quickdraw)")
        p.add_argument('--cell', choices=['lstm', 'gru'], help="cell for --benchmark")


def _add_hardware_options(p: argparse.ArgumentParser, many_reuse: bool = False):
    if many_reuse:
        p.add_argument('--reuse', nargs='+', help="reuse pairs X:Y (kernel:recurrent)")
    else:
        p.add_argument('--reuse', help="reuse pair X:Y (default 1:1)")
    p.add_argument('--strategy', choices=['latency', 'resource'], help="default: resource")
    p.add_argument('--clock', type=float, help="clock frequency in MHz (default 200)")
    p.add_argument('--device', help="target part name or alias for the budget check")
    p.add_argument('--calibration', help="calibration file overriding estimator constants")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="RnnHlsProfiler - fixed-point LSTM/GRU emulation and FPGA performance "
                    "estimation for hls4ml-style designs",
    )
    parser.add_argument('--config', '-c', help="config file (.json, .yaml, .toml); keys match "
                                                "long option names, optionally per subcommand")
    parser.add_argument('--log-file', help="debug log path (default: rnnhls_debug.log)")
    parser.add_argument('--device-db', help="device budget database (overrides RNNHLS_DEVICE_DB)")
    parser.add_argument('--verbose', '-v', action='store_true', default=None,
                        help="print per-point progress")
    parser.add_argument('--no-color', action='store_true', default=None,
                        help="disable colored output")
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('infer', help="run the fixed-point engine over a dataset",
                       epilog=DATASET_HELP)
    _add_model_options(p)
    p.add_argument('--data', '-d', help=DATASET_HELP)
    _add_numeric_options(p)
    p.add_argument('--workers', type=int, help="worker threads (0 = one per core)")
    p.add_argument('--output', '-o', help="scores CSV path")
    p.add_argument('--summary', help="summary JSON path")

    p = sub.add_parser('sweep-quant', help="AUC ratio over integer/fractional bit widths",
                       epilog=DATASET_HELP)
    _add_model_options(p)
    p.add_argument('--data', '-d', help=DATASET_HELP)
    p.add_argument('--integer-bits', help="integer bits, list or range (default 6,8,10,12)")
    p.add_argument('--frac-bits', help="fractional bits, list or range a..b (default 2..16)")
    _add_numeric_options(p, precision=False)
    p.add_argument('--workers', type=int, help="concurrent sweep points (0 = one per core)")
    p.add_argument('--output', '-o', help="CSV path")
    p.add_argument('--summary', help="optional JSON copy of the table")

    p = sub.add_parser('sweep-reuse', help="resources and latency over reuse pairs and widths")
    _add_model_options(p, allow_benchmark=True)
    _add_hardware_options(p, many_reuse=True)
    p.add_argument('--widths', help="total widths, list or range (default 16)")
    p.add_argument('--integer-bits', type=int, help="integer bits of every width (default 6)")
    p.add_argument('--mode', choices=['static', 'non_static'], help="default: static")
    p.add_argument('--vivado', action='store_true', default=None,
                   help="apply the Vivado LUT/FF correction factors")
    p.add_argument('--output', '-o', help="CSV path")

    p = sub.add_parser('compare-modes', help="static versus non-static schedule")
    _add_model_options(p, allow_benchmark=True)
    p.add_argument('--precision', help="working precision (default fixed<16,6>)")
    _add_hardware_options(p)
    p.add_argument('--output', '-o', help="JSON path")

    p = sub.add_parser('estimate', help="one resource/latency estimate")
    _add_model_options(p, allow_benchmark=True)
    p.add_argument('--precision', help="working precision (default fixed<16,6>)")
    _add_hardware_options(p)
    p.add_argument('--mode', choices=['static', 'non_static'], help="default: static")
    p.add_argument('--vivado', action='store_true', default=None,
                   help="apply the Vivado LUT/FF correction factors")
    p.add_argument('--output', '-o', help="JSON path")

    p = sub.add_parser('gen-fixtures', help="write benchmark models, surrogates and datasets")
    p.add_argument('--output-dir', help="target directory (default: fixtures)")
    p.add_argument('--seed', type=int, help=f"splitmix64 seed (default {DEFAULT_SEED})")
    p.add_argument('--samples', type=int, help="rows per synthetic dataset (default 2000)")
    p.add_argument('--benchmarks', nargs='+', help="subset of benchmarks to write")
    return parser


def resolve_options(args: argparse.Namespace, config: Dict[str, Any]) -> argparse.Namespace:
    """
    Fill unset options from the config file, then from DEFAULTS.
    Command-line values always win.
    """
    defaults = dict(DEFAULTS['*'])
    defaults.update(DEFAULTS.get(args.command, {}))
    known = set(vars(args))
    unknown = sorted(set(config) - known)
    if unknown:
        raise ConfigError(f"unknown option(s) for {args.command}: {', '.join(unknown)}")
    for key in known:
        if getattr(args, key) is None:
            if key in config:
                setattr(args, key, config[key])
            elif key in defaults:
                setattr(args, key, defaults[key])
    return args


# --- Helpers ------------------------------------------------------------------

def _engine_config(args: argparse.Namespace, precision: Optional[FxpFormat] = None) -> EngineConfig:
    policy = QuantPolicy(Rounding.parse(args.rounding), Overflow.parse(args.overflow))
    return EngineConfig(
        precision=precision or FxpFormat.parse(args.precision),
        policy=policy,
        mode=RnnMode.parse(args.mode),
        activation_mode=ActivationMode.parse(args.activation_mode),
    )


def _workers(args: argparse.Namespace) -> int:
    workers = int(args.workers)
    if workers < 0:
        raise ConfigError(f"--workers must be >= 0, got {workers}")
    return workers or default_workers()


def _require(args: argparse.Namespace, *names: str):
    for name in names:
        if not getattr(args, name, None):
            raise ConfigError(f"--{name.replace('_', '-')} is required for {args.command}")


def _load_network(args: argparse.Namespace) -> NetworkModel:
    if getattr(args, 'benchmark', None):
        return make_benchmark_shape(args.benchmark, args.cell)
    _require(args, 'model')
    return load_model(args.model)


def _hardware(args: argparse.Namespace, reuse: Any = None, mode: Optional[str] = None) -> HardwareConfig:
    device = get_device(args.device, args.device_db) if args.device else None
    return HardwareConfig(
        reuse=parse_reuse(reuse if reuse is not None else args.reuse),
        strategy=Strategy.parse(args.strategy),
        mode=RnnMode.parse(mode or getattr(args, 'mode', None) or 'static'),
        clock_mhz=float(args.clock),
        device=device,
    )


# --- Subcommands --------------------------------------------------------------

def cmd_infer(args: argparse.Namespace, ui: ConsoleUI) -> int:
    """Scores CSV plus an accuracy/AUC summary for one model and dataset"""
    _require(args, 'model', 'data')
    model = load_model(args.model)
    dataset = load_dataset(args.data)
    cfg = _engine_config(args)
    ui.header(f"Inference: {model.name} @ {cfg.precision} ({cfg.mode.value})")

    engine = InferenceEngine(model, cfg)
    scores = engine.run_batch(dataset, workers=_workers(args))
    writer = ReportWriter()
    scores_path = writer.write_csv(scores_report(scores, dataset.labels), args.output)

    summary: Dict[str, Any] = {
        'model': model.name,
        'dataset': dataset.name,
        'samples': len(dataset),
        'precision': str(cfg.precision),
        'mode': cfg.mode.value,
        'rounding': cfg.policy.rounding.value,
        'overflow': cfg.policy.overflow.value,
        'activation_mode': cfg.activation_mode.value,
        'accuracy': None, 'auc': None, 'float_auc': None, 'auc_ratio': None,
    }
    if len(dataset):
        quantized = ScoredDataset(scores, dataset.labels)
        summary['accuracy'] = accuracy(quantized)
        try:
            auc = one_vs_rest_auc(quantized)
            reference = one_vs_rest_auc(ScoredDataset(engine.run_float(dataset), dataset.labels))
            summary['auc'] = auc.tolist()
            summary['float_auc'] = reference.tolist()
            summary['auc_ratio'] = (auc / reference).tolist() if np.all(reference > 0) else None
        except MetricError as e:
            logging.warning(f"AUC not reported: {e}")
            ui.warning(f"AUC not reported: {e}")
    summary_path = writer.write_json(
        'infer', summary, args.summary or Path(scores_path).with_suffix('.summary.json'))

    if summary['accuracy'] is not None:
        ui.metric("Accuracy", f"{summary['accuracy']:.4f}", indent=1)
    if summary['auc_ratio'] is not None:
        ui.metric("AUC ratio", ", ".join(f"{v:.5f}" for v in summary['auc_ratio']), indent=1)
    ui.show_report_saved(scores_path)
    ui.show_report_saved(summary_path)
    return EXIT_OK


def cmd_sweep_quant(args: argparse.Namespace, ui: ConsoleUI) -> int:
    """AUC ratio table over (integer bits, fractional bits)"""
    _require(args, 'model', 'data')
    model = load_model(args.model)
    dataset = load_dataset(args.data)
    integer_bits = parse_int_list(args.integer_bits)
    frac_bits = parse_int_list(args.frac_bits)
    base = _engine_config(args, precision=FxpFormat.fixed(16, 6))
    ui.header(f"Quantization sweep: {model.name} on {dataset.name}")

    bar = ui.progress_bar(len(integer_bits) * len(frac_bits), "Sweep points")
    report = sweep_quant(model, dataset, integer_bits, frac_bits, base,
                         workers=_workers(args), progress=ui.progress_callback(bar))
    bar.finish()

    writer = ReportWriter()
    path = writer.write_csv(report, args.output)
    if args.summary:
        writer.write_sweep_json(report, args.summary)
    ui.table(report.columns, report.rows)
    ui.show_report_saved(path)
    return EXIT_OK


def cmd_sweep_reuse(args: argparse.Namespace, ui: ConsoleUI) -> int:
    """Resource/latency table over reuse pairs and total widths"""
    model = _load_network(args)
    reuse_list = args.reuse if isinstance(args.reuse, (list, tuple)) else [args.reuse]
    widths = parse_int_list(args.widths)
    hw = _hardware(args, reuse=reuse_list[0])
    calibration = load_calibration(args.calibration)
    ui.header(f"Reuse sweep: {model.name}")

    report = sweep_reuse(model, reuse_list, widths, hw, int(args.integer_bits), calibration,
                         bool(args.vivado))
    path = ReportWriter().write_csv(report, args.output)
    ui.table(['reuse', 'total_bits', 'dsp', 'ff', 'lut', 'bram', 'latency_us_min',
              'ii_cycles', 'throughput_hz', 'fits'], report.rows)
    ui.show_report_saved(path)
    return EXIT_OK


def cmd_compare_modes(args: argparse.Namespace, ui: ConsoleUI) -> int:
    """Static and non-static estimates plus engine output equivalence"""
    model = _load_network(args)
    precision = FxpFormat.parse(args.precision)
    hw = _hardware(args)
    calibration = load_calibration(args.calibration)
    ui.header(f"Schedule comparison: {model.name} @ {precision}, reuse {args.reuse}")

    result = compare_modes(model, precision, hw, calibration)
    ui.show_estimate(result['static'], "Static")
    ui.show_estimate(result['non_static'], "Non-static")
    ui.metric("Throughput speedup", f"{result['throughput_speedup']:.2f}", "x")
    if result['outputs_identical']:
        ui.success("Static and non-static outputs are bit-identical")
    else:
        ui.error("Static and non-static outputs differ")
    path = ReportWriter().write_json('compare_modes', result, args.output)
    ui.show_report_saved(path)
    return EXIT_OK if result['outputs_identical'] else EXIT_VALIDATION


def cmd_estimate(args: argparse.Namespace, ui: ConsoleUI) -> int:
    """One PerfEstimate as JSON"""
    model = _load_network(args)
    precision = FxpFormat.parse(args.precision)
    hw = _hardware(args)
    calibration = load_calibration(args.calibration)
    est = estimate(model, hw, precision, calibration, bool(args.vivado))
    ui.header(f"Estimate: {model.name} @ {precision}, reuse {hw.kernel_reuse}:{hw.recurrent_reuse}")
    ui.show_estimate(est)
    payload = {
        'model': model.name,
        'precision': str(precision),
        'reuse': f"{hw.kernel_reuse}:{hw.recurrent_reuse}",
        'strategy': hw.strategy.value,
        'mode': hw.mode.value,
        'device': hw.device.name if hw.device else None,
        'estimate': est,
    }
    path = ReportWriter().write_json('estimate', payload, args.output)
    ui.show_report_saved(path)
    return EXIT_OK


def cmd_gen_fixtures(args: argparse.Namespace, ui: ConsoleUI) -> int:
    """Benchmark-shaped models, surrogates and synthetic datasets"""
    ui.header(f"Generating fixtures in {args.output_dir}")
    paths = write_fixtures(args.output_dir, int(args.seed), int(args.samples), args.benchmarks)
    for path in paths:
        ui.success(str(path), indent=1)
    return EXIT_OK


HANDLERS: Dict[str, Callable[[argparse.Namespace, ConsoleUI], int]] = {
    'infer': cmd_infer,
    'sweep-quant': cmd_sweep_quant,
    'sweep-reuse': cmd_sweep_reuse,
    'compare-modes': cmd_compare_modes,
    'estimate': cmd_estimate,
    'gen-fixtures': cmd_gen_fixtures,
}


def redirect_log(path: str):
    """Send the debug log to ``path`` instead of the default file"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()
    handler = logging.FileHandler(path, mode='w', encoding='utf-8')
    handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(name)s - %(message)s'))
    root.addHandler(handler)


def main(argv: Optional[Sequence[str]] = None, ui: Optional[ConsoleUI] = None) -> int:
    """
    Parse arguments, run one subcommand and map failures to exit codes:
    0 success, 2 usage/IO, 3 validation, 1 unexpected, 130 interrupted.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config: Dict[str, Any] = {}
        if args.config:
            config = config_for_command(load_structured_file(args.config), args.command, COMMANDS)
            config.pop('config', None)
        resolve_options(args, config)
        if args.log_file:
            redirect_log(args.log_file)
        logging.info(f"Arguments resolved: {args}")
        ui = ui or create_default_ui(use_colors=not args.no_color, verbose=args.verbose)
        return HANDLERS[args.command](args, ui)

    except KeyboardInterrupt:
        logging.warning("Interrupted by user.")
        print("\nInterrupted by user.", file=sys.stderr)
        return EXIT_INTERRUPTED
    except (FileNotFoundError, PermissionError, IsADirectoryError) as e:
        logging.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RnnHlsError as e:
        logging.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logging.critical("An unexpected error occurred:", exc_info=True)
        print(f"CRITICAL ERROR: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED


__all__ = [
    'PROG',
    'COMMANDS',
    'EXIT_OK',
    'EXIT_UNEXPECTED',
    'EXIT_USAGE',
    'EXIT_VALIDATION',
    'EXIT_INTERRUPTED',
    'build_parser',
    'resolve_options',
    'cmd_infer',
    'cmd_sweep_quant',
    'cmd_sweep_reuse',
    'cmd_compare_modes',
    'cmd_estimate',
    'cmd_gen_fixtures',
    'main',
]
