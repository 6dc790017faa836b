"""
RnnHlsProfiler - CLI Interface
Terminal output with colors, progress bars and formatted result tables
"""

import sys
import time
from typing import Optional, List, Dict, Any, TextIO
from dataclasses import dataclass
import os


@dataclass
class ConsoleStyle:
    """Terminal color and style definitions"""
    RESET = '\033[0m'
    BOLD = '\033[1m'
    DIM = '\033[2m'

    # Colors
    RED = '\033[91m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    BLUE = '\033[94m'
    MAGENTA = '\033[95m'
    CYAN = '\033[96m'
    WHITE = '\033[97m'

    BG_RED = '\033[41m'


class ProgressBar:
    """
    Single-line progress bar for sweep points.
    Redraws in place on a terminal, prints nothing when the stream is not one.
    """

    def __init__(self, total: int, width: int = 40, title: str = "",
                 stream: Optional[TextIO] = None):
        """
        Initialize progress bar

        Args:
            total: Total number of steps
            width: Width of progress bar in characters
            title: Title printed before the first draw
            stream: Output stream (default: stdout)
        """
        self.total = max(total, 1)
        self.width = width
        self.title = title
        self.current = 0
        self.start_time = time.time()
        self.stream = stream or sys.stdout
        self.interactive = hasattr(self.stream, 'isatty') and self.stream.isatty()

    def update(self, step: int = 1, message: str = ""):
        self.current = min(self.current + step, self.total)
        self._draw(message)

    def set(self, done: int, message: str = ""):
        self.current = min(done, self.total)
        self._draw(message)

    def _draw(self, message: str = ""):
        if not self.interactive:
            return
        percent = (self.current / self.total) * 100
        filled = int(self.width * self.current / self.total)
        bar = '█' * filled + '░' * (self.width - filled)

        elapsed = time.time() - self.start_time
        if self.current > 0:
            eta = (elapsed / self.current) * (self.total - self.current)
            eta_str = f"ETA: {int(eta)}s"
        else:
            eta_str = "ETA: --"

        if self.title and self.current <= 1:
            self.stream.write(f"{self.title}\n")
        suffix = f"  {message}" if message else ""
        self.stream.write(f"\r\033[K[{bar}] {percent:5.1f}% {eta_str}{suffix}")
        self.stream.flush()

    def finish(self, message: str = "Complete"):
        self.current = self.total
        self._draw(message)
        if self.interactive:
            self.stream.write('\n')
            self.stream.flush()


class ConsoleUI:
    """
    Console interface for RnnHlsProfiler
    """

    def __init__(self, use_colors: bool = True, verbose: bool = False,
                 stream: Optional[TextIO] = None):
        """
        Initialize console UI

        Args:
            use_colors: Whether to use ANSI color codes
            verbose: Print per-point progress lines
            stream: Output stream (default: stdout)
        """
        self.style = ConsoleStyle()
        self.stream = stream or sys.stdout
        self.use_colors = use_colors and self._supports_colors()
        self.verbose = verbose

    def _supports_colors(self) -> bool:
        if os.environ.get('NO_COLOR'):
            return False
        return hasattr(self.stream, 'isatty') and self.stream.isatty()

    def _color(self, text: str, color: str) -> str:
        if self.use_colors:
            return f"{color}{text}{self.style.RESET}"
        return text

    def _print(self, text: str = ""):
        print(text, file=self.stream)

    def header(self, title: str):
        width = 70
        self._print()
        self._print(self._color("=" * width, self.style.CYAN))
        self._print(self._color(f"  {title}", self.style.BOLD + self.style.CYAN))
        self._print(self._color("=" * width, self.style.CYAN))

    def subheader(self, title: str):
        self._print()
        self._print(self._color(title, self.style.BOLD + self.style.WHITE))
        self._print(self._color("-" * 50, self.style.DIM))

    def info(self, message: str, indent: int = 0):
        self._print(f"{'  ' * indent}{message}")

    def success(self, message: str, indent: int = 0):
        icon = self._color("✓", self.style.GREEN)
        self._print(f"{'  ' * indent}{icon} {message}")

    def warning(self, message: str, indent: int = 0):
        icon = self._color("!", self.style.YELLOW)
        self._print(f"{'  ' * indent}{icon} {message}")

    def error(self, message: str, indent: int = 0):
        icon = self._color("✗", self.style.RED)
        self._print(f"{'  ' * indent}{icon} {message}")

    def metric(self, label: str, value: str, unit: str = "", indent: int = 0):
        """Display a metric"""
        label_colored = self._color(f"{label}:", self.style.DIM)
        value_colored = self._color(value, self.style.WHITE + self.style.BOLD)
        unit_str = f" {unit}" if unit else ""
        self._print(f"{'  ' * indent}{label_colored} {value_colored}{unit_str}")

    def progress_bar(self, total: int, title: str = "") -> ProgressBar:
        return ProgressBar(total, title=title, stream=self.stream)

    def progress_callback(self, bar: ProgressBar):
        """Adapter for the sweep drivers' (done, total, label) callback"""
        def callback(done: int, total: int, label: str):
            bar.set(done, f"{label} {done}/{total}")
            if self.verbose:
                self.info(f"{label}: point {done}/{total}", indent=1)
        return callback

    def table(self, columns: List[str], rows: List[Dict[str, Any]], limit: int = 20):
        """Aligned text table of the first ``limit`` rows"""
        if not rows:
            self.info("(no rows)", indent=1)
            return
        shown = rows[:limit]
        cells = [[_format_cell(row.get(c)) for c in columns] for row in shown]
        widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(columns)]
        self._print(self._color("  ".join(c.rjust(w) for c, w in zip(columns, widths)),
                                self.style.BOLD))
        for r in cells:
            self._print("  ".join(v.rjust(w) for v, w in zip(r, widths)))
        if len(rows) > limit:
            self.info(self._color(f"... {len(rows) - limit} more rows", self.style.DIM))

    def show_estimate(self, est: Any, title: str = "Estimate"):
        """Resources, latency and throughput of one PerfEstimate"""
        self.subheader(title)
        self.metric("DSP", str(est.dsp), indent=1)
        self.metric("FF", str(est.ff), indent=1)
        self.metric("LUT", str(est.lut), indent=1)
        self.metric("BRAM", str(est.bram), indent=1)
        self.metric("Latency", f"{est.latency_cycles_min}-{est.latency_cycles_max}", "cycles",
                    indent=1)
        self.metric("Latency", f"{est.latency_us_min:.3f}-{est.latency_us_max:.3f}", "us",
                    indent=1)
        self.metric("II", str(est.ii_cycles), "cycles", indent=1)
        self.metric("Throughput", f"{est.throughput_hz:,.0f}", "inferences/s", indent=1)
        for resource, ok in est.fits_device.items():
            if ok:
                self.success(f"{resource.upper()} fits", indent=1)
            else:
                self.error(f"{resource.upper()} exceeds the device budget", indent=1)
        for message in est.warnings:
            self.warning(message, indent=1)

    def show_report_saved(self, filepath: Any):
        self.success(f"Report saved to: {filepath}")


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if value is None:
        return "-"
    return str(value)


def create_default_ui(use_colors: bool = True, verbose: bool = False) -> ConsoleUI:
    """Create default console UI instance"""
    return ConsoleUI(use_colors=use_colors, verbose=verbose)


__all__ = [
    'ConsoleUI',
    'ProgressBar',
    'ConsoleStyle',
    'create_default_ui'
]
