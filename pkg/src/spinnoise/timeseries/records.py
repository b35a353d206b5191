"""Binary voltage-record format.

A 64-byte little-endian header ``magic (8 bytes) | sample_rate (float64) |
n_samples (uint64) | seed (uint64) | 32 reserved zero bytes`` is followed by
``n_samples`` little-endian float64 samples.
"""

import struct

import numpy as np

from .synthesis import TimeSeriesRun

__all__ = ["MAGIC", "HEADER", "write_record", "read_record", "RecordFormatError"]

MAGIC = b"SNLB0001"
HEADER = struct.Struct("<8sdQQ32x")
assert HEADER.size == 64


class RecordFormatError(ValueError):
    pass


def write_record(path, run):
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, float(run.sample_rate), int(run.data.size), int(run.seed)))
        fh.write(np.ascontiguousarray(run.data, dtype="<f8").tobytes())


def read_record(path):
    """Read a record; returns a :class:`TimeSeriesRun` without truth metadata."""
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
        if len(head) != HEADER.size:
            raise RecordFormatError(f"{path}: truncated header")
        magic, fs, n, seed = HEADER.unpack(head)
        if magic != MAGIC:
            raise RecordFormatError(f"{path}: bad magic {magic!r}")
        data = np.fromfile(fh, dtype="<f8")
    if data.size != n:
        raise RecordFormatError(f"{path}: header declares {n} samples, found {data.size}")
    meta = {"sample_rate": fs, "n_samples": n, "seed": seed, "duration": n / fs}
    return TimeSeriesRun(data=data.astype(float), sample_rate=fs, seed=seed, metadata=meta)
