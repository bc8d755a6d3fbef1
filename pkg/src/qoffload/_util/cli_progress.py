import re
import sys
import threading
import time
from contextlib import contextmanager

from rich.console import Console

# "Block 12/2000", "Cell 3/18", "Seed 2/10"
COUNTER_PATTERN = re.compile(r"(Block|Cell|Seed|Trial)\s+(\d+)/(\d+)")


def format_duration(seconds: float) -> str:
    """Convert seconds into a compact string like 1h2m32s.

    Durations under a minute keep one decimal.
    """
    hours, remainder = divmod(int(seconds), 3600)
    minutes, secs_int = divmod(remainder, 60)
    if hours == 0 and minutes == 0:
        return f"{seconds:.1f}s"
    parts = []
    if hours > 0:
        parts.append(f"{hours}h")
    parts.append(f"{minutes}m")
    parts.append(f"{secs_int}s")
    return "".join(parts)


def render_bar(percentage: int, width: int = 10) -> str:
    """Ten-cell text bar, one cell per 10%."""
    filled = min(width, percentage * width // 100)
    return "■" * filled + "-" * (width - filled)


class RichProgressDisplay:
    """Renders `ProgressCallback` updates on the terminal.

    TTY output gets a spinner thread and an in-place counter bar; anything
    else (CI logs, redirected output) gets one plain line per phase, step and
    counter update.
    """

    SPINNER_FRAMES = ["■", "≡", "=", "-", "=", "≡"]
    MAX_STEP_WIDTH = 34

    def __init__(
        self,
        console: Console | None = None,
        show_progress: bool = True,
    ) -> None:
        self.console = console if console is not None else Console(force_terminal=True)
        self.show_progress = show_progress
        self.is_tty = sys.stdout.isatty()
        self.current_phase: str = ""
        self.current_step: str = ""
        self.counter_info: str = ""
        self.step_start_time: float = 0.0
        self.step_done: bool = False
        self.spinner_index: int = 0
        self.spinner_thread: threading.Thread | None = None
        self.spinner_stop_event = threading.Event()
        self.spinner_lock = threading.Lock()

    def _spinner_worker(self) -> None:
        while not self.spinner_stop_event.is_set():
            if self.current_step and not self.step_done:
                with self.spinner_lock:
                    self.spinner_index = (self.spinner_index + 1) % len(
                        self.SPINNER_FRAMES
                    )
                    spinner = self.SPINNER_FRAMES[self.spinner_index]
                    elapsed = format_duration(time.time() - self.step_start_time)
                    sys.stdout.write(
                        f"\r\033[K  \033[1;36m{spinner}\033[0m {self.counter_info}"
                        f" | {elapsed} | {self.current_step}"
                    )
                    sys.stdout.flush()
            self.spinner_stop_event.wait(0.1)

    def _start_spinner(self) -> None:
        self._stop_spinner()
        self.spinner_stop_event.clear()
        self.spinner_thread = threading.Thread(target=self._spinner_worker, daemon=True)
        self.spinner_thread.start()

    def _stop_spinner(self) -> None:
        if self.spinner_thread and self.spinner_thread.is_alive():
            self.spinner_stop_event.set()
            self.spinner_thread.join(timeout=0.5)
            self.spinner_thread = None

    def _finish_step(self) -> None:
        if not self.current_step or self.step_done:
            return
        elapsed = format_duration(time.time() - self.step_start_time)
        if self.is_tty:
            self._stop_spinner()
            sys.stdout.write("\r\033[K")
            print(f"  {self.current_step.ljust(self.MAX_STEP_WIDTH)} ({elapsed})")
        else:
            print(f"  {self.current_step} - {elapsed}", flush=True)
        self.step_done = True

    def callback(
        self,
        phase: str | None = None,
        step_name: str | None = None,
        step_number: int = 0,
        total_steps: int = 0,
        message: str = "",
        progress: float = 0.0,
    ) -> None:
        """Progress callback."""
        if not self.show_progress:
            return

        if phase is not None and phase != self.current_phase:
            self._finish_step()
            self.current_phase = phase
            self.current_step = ""
            if self.is_tty:
                self.console.print(f"\n[bold cyan]{phase}[/bold cyan]")
            else:
                print(f"\n{phase}", flush=True)

        if step_name is not None:
            new_step = (
                f"{step_number}/{total_steps} {step_name}"
                if total_steps > 1
                else step_name
            )
            if new_step != self.current_step:
                self._finish_step()
                with self.spinner_lock:
                    self.current_step = new_step
                    self.counter_info = ""
                    self.step_start_time = time.time()
                    self.step_done = False
                if self.is_tty:
                    self._start_spinner()

        match = COUNTER_PATTERN.match(message) if message else None
        if match:
            current = int(match.group(2))
            total = int(match.group(3))
            percentage = int(100 * current / max(1, total))
            if self.is_tty:
                with self.spinner_lock:
                    self.counter_info = (
                        f"|{str(percentage).rjust(3)}%| "
                        f"\033[36m{render_bar(percentage)}\033[0m {current}/{total}"
                    )
            else:
                print(
                    f"  {self.current_step}: {percentage}% ({current}/{total})",
                    flush=True,
                )
            if current == total:
                self._finish_step()

    @contextmanager
    def progress_context(self, initial_message: str = ""):
        """Context manager wrapping one CLI job."""
        if not self.show_progress:
            yield self
            return
        try:
            if initial_message:
                self.current_phase = initial_message
                if self.is_tty:
                    self.console.print(f"\n[bold cyan]{initial_message}[/bold cyan]")
                else:
                    print(f"\n{initial_message}", flush=True)
            yield self
        finally:
            self._finish_step()
            self._stop_spinner()
            self.current_phase = ""
            self.current_step = ""
            self.step_done = False


def create_progress_display(
    console: Console | None = None,
    silent: bool = False,
) -> RichProgressDisplay:
    """Factory function to create a progress display."""
    return RichProgressDisplay(console=console, show_progress=not silent)
