import json
import math

import numpy as np
import pytest

from matern_cardinal.app.utils.file_io import format_value, report_filename, write_csv, write_json


def test_report_filename():
    assert report_filename("matern", 2, 2, "converge", "csv") == "matern_2d_m2_converge.csv"
    assert report_filename("eta2", 2, 2, "compact", "json") == "eta2_2d_m2_compact.json"


@pytest.mark.parametrize("value,text", [
    (0.1, "0.10000000000000001"),
    (np.float64(2.5), "2.5"),
    (3, "3"),
    (np.int64(7), "7"),
    (True, "true"),
    (np.bool_(False), "false"),
    (math.nan, "nan"),
    (math.inf, "inf"),
    (-math.inf, "-inf"),
    (None, "nan"),
    ("spatial", "spatial"),
])
def test_format_value(value, text):
    assert format_value(value) == text


def test_write_csv(tmp_path):
    path = write_csv(tmp_path / "out" / "table.csv", ["h", "error"], [(0.5, 1e-3), (0.25, math.nan)])
    assert path.read_bytes() == b"h,error\n0.5,0.001\n0.25,nan\n"


def test_write_csv_accepts_generators(tmp_path):
    rows = ((i, i * i) for i in range(3))
    path = write_csv(tmp_path / "squares.csv", ["i", "sq"], rows)
    assert path.read_text().splitlines() == ["i,sq", "0,0", "1,1", "2,4"]


def test_write_json(tmp_path):
    data = {"b": np.array([1.0, 2.0]), "a": {"n": np.int64(3), "x": math.inf, "ok": np.bool_(True)},
            "path": tmp_path, "missing": math.nan}
    path = write_json(tmp_path / "report.json", data)
    text = path.read_text()
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    loaded = json.loads(text)
    assert loaded["b"] == [1.0, 2.0]
    assert loaded["a"] == {"n": 3, "x": "inf", "ok": True}
    assert loaded["missing"] == "nan"
    assert loaded["path"] == str(tmp_path)
