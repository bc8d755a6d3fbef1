"""Atomic output writers shared by the harness and the CLI."""

import csv
import io
import json
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

COMMENT_PREFIX = "# "


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write `text` to a temporary sibling file, then rename it over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def format_float(value: float) -> str:
    """Shortest round-trip representation; identical floats give identical text."""
    return repr(float(value))


def render_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    comments: Sequence[str] = (),
) -> str:
    """CSV text with optional leading `# ` comment lines (config echo, seeds)."""
    buffer = io.StringIO()
    for comment in comments:
        buffer.write(f"{COMMENT_PREFIX}{comment}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [format_float(v) if isinstance(v, float) else v for v in row]
        )
    return buffer.getvalue()


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    comments: Sequence[str] = (),
) -> Path:
    return atomic_write_text(path, render_csv(header, rows, comments))


def write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_csv(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    """Read a CSV written by `write_csv`, returning (comments, rows)."""
    comments: list[str] = []
    body: list[str] = []
    with open(path, encoding="utf-8", newline="") as handle:
        for line in handle:
            if line.startswith(COMMENT_PREFIX):
                comments.append(line[len(COMMENT_PREFIX) :].rstrip("\n"))
            else:
                body.append(line)
    return comments, list(csv.DictReader(body))
