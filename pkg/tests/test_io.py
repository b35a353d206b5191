import json
import math

import numpy as np

from spinnoise.io import metadata_path, read_csv, write_csv, write_metadata


def test_csv_format(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["x", "flag", "label"], [(1 / 3, True, "a"), (2e-20, np.bool_(False), "b")])
    raw = p.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "x,flag,label"
    assert lines[1] == "3.33333333e-01,1,a"
    assert lines[2] == "2.00000000e-20,0,b"


def test_csv_round_trip(tmp_path, rng):
    p = tmp_path / "t.csv"
    data = rng.lognormal(size=(50, 3)) * 1e-18
    write_csv(p, ["a", "b", "c"], data)
    back = read_csv(p)
    assert list(back) == ["a", "b", "c"]
    np.testing.assert_allclose(back["b"], data[:, 1], rtol=5e-9)


def test_csv_string_column(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["v", "s"], [(1.0, "x"), (2.0, "y")])
    back = read_csv(p)
    assert back["s"].tolist() == ["x", "y"] and back["v"].tolist() == [1.0, 2.0]


def test_metadata_sidecar(tmp_path):
    out = tmp_path / "spec.csv"
    side = write_metadata(out, {"t2": math.inf, "arr": np.arange(3), "n": np.int64(4), "ok": np.bool_(True), "nan": math.nan})
    assert side == metadata_path(out) == tmp_path / "spec.csv.meta.json"
    meta = json.loads(side.read_text())
    assert meta == {"arr": [0, 1, 2], "n": 4, "nan": "nan", "ok": True, "t2": "inf"}
