import math

import numpy as np
import pytest

from superradiance.io import DataFormatError, fmt, read_trace_csv, write_trace_csv


def test_fmt():
    assert fmt(None) == ""
    assert fmt(math.inf) == "inf"
    assert fmt(0.1) == "0.1"
    assert float(fmt(1 / 3)) == pytest.approx(1 / 3, rel=1e-12)


def test_trace_round_trip(tmp_path):
    t = np.linspace(0, 1, 11)
    v = np.exp(-t)
    path = write_trace_csv(tmp_path / "t.csv", t, v, {"a": 1}, kind="intensity")
    times, values, errors, header = read_trace_csv(path)
    np.testing.assert_allclose(times, t, rtol=5e-12)  # 12 significant digits on disk
    np.testing.assert_allclose(values, v, rtol=5e-12)  # 12 significant digits on disk
    assert errors is None
    assert header["kind"] == "intensity" and header["config"] == '{"a":1}'


def test_three_columns(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("0,1,0.1\n0.1,0.9,0.1\n")
    _, _, err, _ = read_trace_csv(p)
    np.testing.assert_allclose(err, [0.1, 0.1])


@pytest.mark.parametrize(
    "body,line",
    [("0,1\n0.1,1,0.2\n", 2), ("0,1\n0.1,nan\n", 2), ("time_ns,value\n0,1\n1,2,3,4\n", 3), ("# only header\n", 1)],
)
def test_malformed(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataFormatError) as err:
        read_trace_csv(p)
    assert err.value.line == line
