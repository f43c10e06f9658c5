"""
Progress indicators for long sweeps and verification runs.

Spinners go to stderr and only animate on a terminal, so stdout and output
files are unaffected.
"""
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Callable, List, Optional, Sequence, TextIO


class LoaderStyle(Enum):
    DOTS = "dots"         # ⠋⠙⠹⠸⠼⠴⠦⠧⠇⠏
    PULSE = "pulse"       # ◐◓◑◒
    BRAILLE = "braille"   # ⣾⣽⣻⢿⡿⣟⣯⣷


FRAMES = {
    LoaderStyle.DOTS: ["⠋", "⠙", "⠹", "⠸", "⠼", "⠴", "⠦", "⠧", "⠇", "⠏"],
    LoaderStyle.PULSE: ["◐", "◓", "◑", "◒"],
    LoaderStyle.BRAILLE: ["⣾", "⣽", "⣻", "⢿", "⡿", "⣟", "⣯", "⣷"],
}


class ProgressTracker:
    """Tracks nested operations and animates the innermost one."""

    def __init__(self, stream: Optional[TextIO] = None):
        self.stream = stream
        self.operations: List[str] = []
        self.current: Optional[str] = None
        self._stop = False
        self._thread: Optional[threading.Thread] = None
        self._lock = threading.Lock()

    @property
    def _out(self) -> TextIO:
        return self.stream if self.stream is not None else sys.stderr

    def _animated(self) -> bool:
        isatty = getattr(self._out, 'isatty', None)
        return bool(isatty and isatty())

    def start(self, message: str, style: LoaderStyle = LoaderStyle.DOTS):
        """Start tracking a new operation."""
        with self._lock:
            self.operations.append(message)
            self.current = message
            if self._animated() and not self._thread:
                self._stop = False
                self._thread = threading.Thread(target=self._animate, args=(style,))
                self._thread.daemon = True
                self._thread.start()

    def stop(self, success: bool = True, detail: str = ""):
        """Stop tracking the current operation and print its outcome."""
        thread = None
        with self._lock:
            if self.current:
                symbol = "✓" if success else "✗"
                suffix = f" ({detail})" if detail else ""
                prefix = "\r" if self._animated() else ""
                self._out.write(f"{prefix}{symbol} {self.current}{suffix}\n")
                self._out.flush()
                self.operations.remove(self.current)
                self.current = self.operations[-1] if self.operations else None

            if not self.operations:
                self._stop = True
                thread, self._thread = self._thread, None
        if thread:
            thread.join()

    def _animate(self, style: LoaderStyle):
        frames = FRAMES[style]
        i = 0
        while not self._stop:
            with self._lock:
                if self.current:
                    self._out.write(f"\r{frames[i % len(frames)]} {self.current}")
                    self._out.flush()
            time.sleep(0.1)
            i += 1


# Global progress tracker
_progress = ProgressTracker()

def track_progress(message: str, style: LoaderStyle = LoaderStyle.DOTS) -> 'ProgressContext':
    """
    Context manager to track progress of a block of code.

    The context object has a ``detail`` attribute; whatever is assigned to it
    is printed next to the final status symbol.

    Example:
        with track_progress("Sweeping homodyne...") as step:
            curve = sweep_error_curve(spec, grid)
            step.detail = f"{len(curve.points)} points"
    """
    class ProgressContext:
        detail = ""

        def __enter__(self):
            _progress.start(message, style)
            return self

        def __exit__(self, exc_type, exc_val, exc_tb):
            _progress.stop(success=exc_type is None, detail=self.detail)
            return False

    return ProgressContext()


def run_parallel(tasks: Sequence[Callable[[], Any]], workers: int = 1) -> List[Any]:
    """
    Run independent tasks on a thread pool.

    Results come back in task order whatever the completion order; with
    ``workers <= 1`` the tasks simply run in sequence. Exceptions propagate.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(task) for task in tasks]
        return [future.result() for future in futures]
