"""Deterministic text output: UTF-8, no BOM, ``\\n`` line endings, atomic replace."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np


def write_text(path: str | Path, lines: Iterable[str]) -> Path:
    """Write ``lines`` (each terminated by a newline) to ``path`` atomically."""
    path = Path(path)
    data = "".join(line + "\n" for line in lines).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_real(x) -> str:
    """Shortest representation that reads back to the same float."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot write non-finite value {x}")
    if x == 0:
        return "0"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_number(x, sig: int | None = None) -> str:
    """Integers bare; reals shortest round-trip form, optionally capped at ``sig`` digits."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if sig is None:
        return format_real(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot write non-finite value {x}")
    short = format_real(x)
    digits = len(short.lstrip("-").split("e")[0].replace(".", "").lstrip("0"))
    if digits <= sig:
        return short
    return format(x, f".{sig}g")
