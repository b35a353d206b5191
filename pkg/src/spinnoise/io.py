"""CSV and JSON sidecar writers shared by the command-line tools."""

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["write_csv", "read_csv", "write_metadata", "metadata_path"]


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    return f"{float(x):.8e}"


def write_csv(path, columns, rows):
    """Write a header row then rows in 9-significant-digit scientific notation.

    Newlines are always ``\\n``. ``rows`` may be a 2-D array or an iterable of
    sequences mixing numbers, booleans and strings.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path):
    """Read a file written by :func:`write_csv` into ``{column: ndarray}``.

    Non-numeric columns come back as string arrays.
    """
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        cols = [[] for _ in header]
        for line in fh:
            for c, v in zip(cols, line.rstrip("\n").split(",")):
                c.append(v)
    out = {}
    for name, vals in zip(header, cols):
        try:
            out[name] = np.array([float(v) for v in vals])
        except ValueError:
            out[name] = np.array(vals)
    return out


def metadata_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_metadata(path, metadata):
    """Write ``<path>.meta.json`` next to an output file; returns the sidecar path."""
    side = metadata_path(path)
    with open(side, "w", newline="\n") as fh:
        json.dump(_jsonable(metadata), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return side
