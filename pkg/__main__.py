"""
RnnHlsProfiler - Recurrent Network HLS Profiler
Main entry point
"""

import sys
from pathlib import Path
import logging

DEFAULT_LOG = Path("rnnhls_debug.log")
EXIT_INTERRUPTED = 130


class StreamToLogger:
    """Mirrors a console stream into the debug log, line by line"""
    def __init__(self, stream, logger, level):
        self.stream = stream
        self.logger = logger
        self.level = level

    def write(self, buf):
        self.stream.write(buf)
        self.stream.flush()
        for line in buf.rstrip().splitlines():
            if line.strip():
                self.logger.log(self.level, line.rstrip())

    def flush(self):
        self.stream.flush()

    def isatty(self):
        return hasattr(self.stream, 'isatty') and self.stream.isatty()


def configure_logging(path: Path = DEFAULT_LOG):
    """Debug log to a file; stderr keeps printing and is copied into the log.

    ``--log-file`` later moves the file handler (see ``commands.redirect_log``).
    """
    logging.basicConfig(
        level=logging.DEBUG,
        format='%(asctime)s - %(levelname)s - %(name)s - %(message)s',
        filename=str(path),
        filemode='w'
    )
    console = sys.stderr
    sys.stderr = StreamToLogger(console, logging.getLogger('STDERR'), logging.ERROR)
    return console


def add_repo_root():
    root = Path(__file__).resolve().parent
    if str(root) not in sys.path:
        sys.path.insert(0, str(root))
    return root


def main(argv=None):
    console = configure_logging()
    root = add_repo_root()
    logging.info("rnnhls start: python %s on %s, root %s", sys.version.split()[0], sys.platform, root)

    try:
        from src.core.commands import main as run_command
    except ImportError as e:
        # numpy/scipy missing is the usual cause
        logging.critical("Could not import the profiler modules: %s", e, exc_info=True)
        print(f"CRITICAL ERROR: could not import required modules: {e}", file=console)
        print("Install the dependencies with: pip install -r requirements.txt", file=console)
        return 1

    exit_code = 0
    try:
        exit_code = run_command(sys.argv[1:] if argv is None else argv)
    except KeyboardInterrupt:
        logging.warning("Interrupted by user.")
        print("\nInterrupted.", file=console, flush=True)
        exit_code = EXIT_INTERRUPTED
    finally:
        logging.info("rnnhls finished with exit code %d", exit_code)
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
