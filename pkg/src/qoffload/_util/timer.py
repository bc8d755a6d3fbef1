"""Timing and output tracking utilities for qoffload commands."""

import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from rich.console import Console
from rich.text import Text

console = Console()


class ResourceStats:
    """Durations and output files collected while a command runs."""

    def __init__(self) -> None:
        self.stats: dict[str, float] = {}
        self.operation_order: list[str] = []
        self.output_files: list[tuple[str, Path]] = []

    def reset(self) -> None:
        """Forget everything recorded so far (one CLI invocation per reset)."""
        self.stats.clear()
        self.operation_order.clear()
        self.output_files.clear()

    def add_stats(self, description: str, duration: float) -> None:
        if description not in self.stats:
            self.operation_order.append(description)
        self.stats[description] = duration

    def add_output_file(self, description: str, file_path: Path | str) -> None:
        self.output_files.append((description, Path(file_path)))

    @staticmethod
    def format_compact_duration(seconds: float) -> str:
        """Convert seconds into compact string like 1h2m32s."""
        hours, remainder = divmod(int(seconds), 3600)
        minutes, secs = divmod(remainder, 60)
        parts = []
        if hours > 0:
            parts.append(f"{hours}h")
        if minutes > 0 or hours > 0:
            parts.append(f"{minutes}m")
        parts.append(f"{secs}s")
        return "".join(parts)

    @staticmethod
    def format_file_size(size_bytes: int) -> str:
        size = float(size_bytes)
        for unit in ["B", "KB", "MB", "GB"]:
            if size < 1024:
                return f"{size:.1f} {unit}"
            size /= 1024
        return f"{size:.1f} TB"

    def get_summary_panel(self, success: bool = True) -> Text:
        """Status line, total time and the list of written outputs."""
        lines = [Text("")]
        if success:
            lines.append(
                Text("✓ All operations completed successfully.", style="bold green")
            )
        else:
            lines.append(Text("✗ Operation failed", style="bold red"))

        if self.stats:
            total = sum(self.stats.values())
            lines.append(
                Text(f"Total time: {self.format_compact_duration(total)}", style="cyan")
            )

        if self.output_files:
            lines.append(Text("\nOutputs:", style="bold"))
            for _, file_path in self.output_files:
                padded_name = file_path.name.ljust(34)
                if file_path.exists():
                    size = self.format_file_size(os.path.getsize(file_path))
                    lines.append(Text(f"  • {padded_name} {size}", style="dim"))
                else:
                    lines.append(
                        Text(f"  • {padded_name} (not found)", style="dim red")
                    )

        return Text("\n").join(lines)


resource_stats = ResourceStats()


@contextmanager
def timer(description: str, silent: bool = False):
    """Time a block of work and record it in `resource_stats`.

    Example:
        >>> with timer("Sweep"):
        ...     run_sweep(config)
        ✓ Done (12s)
    """
    start_time = time.time()
    try:
        yield
    finally:
        duration = time.time() - start_time
        resource_stats.add_stats(description, duration)
        if not silent:
            compact = ResourceStats.format_compact_duration(duration)
            if sys.stdout.isatty():
                console.print(
                    f"[dim cyan]✓[/dim cyan] [white]Done[/white] [dim]({compact})[/dim]"
                )
            else:
                print(f"Done ({compact})")
