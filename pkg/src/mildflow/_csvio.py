"""Deterministic CSV writing with atomic replacement."""

import os
import tempfile
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    """Shortest round-trip representation; identical inputs give identical bytes."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "pass" if x else "fail"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows, comment=None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    if header:
        lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, comment=None) -> Path:
    return atomic_write(path, csv_text(header, rows, comment))


def snapshot_text(t: float, values: np.ndarray) -> str:
    """Grid values row-major (rows indexed by x) with a ``# t=.. nx=.. [ny=..]`` header."""
    values = np.asarray(values)
    head = f"# t={fmt(float(t))} nx={values.shape[0]}"
    if values.ndim == 2:
        head += f" ny={values.shape[1]}"
    rows = values.reshape(values.shape[0], -1)
    return head + "\n" + "\n".join(",".join(fmt(float(v)) for v in row) for row in rows) + "\n"
