"""Versioned CSV and JSON artifacts, written atomically."""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA_LINE = "# schema=v1"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(columns, rows):
    lines = [SCHEMA_LINE, ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def read_csv(path):
    """Columns and rows of an artifact written by ``write_csv``; values stay strings."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SCHEMA_LINE:
        raise ValueError(f"{path}: missing schema header")
    columns = tuple(lines[1].split(","))
    return columns, [tuple(line.split(",")) for line in lines[2:]]


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, columns, rows):
    return write_atomic(path, csv_text(columns, rows))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, obj):
    return write_atomic(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
