import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from emdenfowler.report import SCHEMA_VERSION, dumps, write_csv


def test_non_finite_as_strings():
    out = json.loads(dumps({"a": math.inf, "b": -math.inf, "c": math.nan}))
    assert out == {"a": "inf", "b": "-inf", "c": "nan"}


def test_numpy_values():
    out = json.loads(dumps({"x": np.float64(0.1), "n": np.int64(3), "ok": np.bool_(True), "v": np.arange(3.0)}))
    assert out == {"x": 0.1, "n": 3, "ok": True, "v": [0.0, 1.0, 2.0]}


def test_seventeen_digits():
    assert "0.10000000000000001" in dumps({"x": 0.1})


def test_schema_version():
    assert SCHEMA_VERSION == 1


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert json.loads(dumps({"x": x}))["x"] == x


def test_csv_header(tmp_path):
    p = write_csv(tmp_path / "t.csv", [0.0, 0.5], [1.0, 0.9], [0.0, -0.1])
    lines = p.read_text().splitlines()
    assert lines[0] == "r,w,wprime" and len(lines) == 3
    assert [float(x) for x in lines[2].split(",")] == [0.5, 0.9, -0.1]
