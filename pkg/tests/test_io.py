import re

import numpy as np
import pytest

from rakeness.exceptions import InvalidInputError
from rakeness.io import (
    fmt,
    parse_keyvalue,
    read_keyvalue,
    read_matrix,
    read_spectrum,
    read_table,
    write_keyvalue,
    write_matrix,
    write_spectrum,
    write_table,
)
from rakeness.spectral import SpectralDensity
from rakeness.svg import _ticks, line_chart


def test_fmt():
    assert fmt(0.1) == "0.1"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(np.float64(2.5e-20)) == "2.5e-20"
    assert fmt(np.int64(7)) == "7"
    assert fmt(True) == "1"
    assert fmt("iid") == "iid"


def test_table_roundtrip_and_line_endings(tmp_path):
    p = tmp_path / "t.csv"
    write_table(p, ("a", "b"), [(1, 0.5), (2, float("nan"))])
    raw = p.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header, rows = read_table(p)
    assert header == ["a", "b"]
    assert rows == [["1", "0.5"], ["2", "nan"]]
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(InvalidInputError):
        read_table(tmp_path / "empty.csv")


def test_matrix_roundtrip(tmp_path, rng):
    M = rng.standard_normal((4, 3))
    write_matrix(tmp_path / "m.csv", M)
    np.testing.assert_allclose(read_matrix(tmp_path / "m.csv"), M, rtol=1e-11)
    write_matrix(tmp_path / "v.csv", np.arange(3.0))
    assert read_matrix(tmp_path / "v.csv").shape == (1, 3)


def test_keyvalue(tmp_path):
    text = "# comment\nexperiment = ecg\n\nM_list = 32, 48  # trailing\n"
    assert parse_keyvalue(text) == {"experiment": "ecg", "M_list": "32, 48"}
    for bad in ("novalue\n", " = 3\n", "a = 1\na = 2\n"):
        with pytest.raises(InvalidInputError):
            parse_keyvalue(bad)
    write_keyvalue(tmp_path / "k.meta", {"x": 0.25, "flag": False, "name": "a b"})
    assert read_keyvalue(tmp_path / "k.meta") == {"x": "0.25", "flag": "0", "name": "a b"}


def test_spectrum_roundtrip(tmp_path):
    sd = SpectralDensity.from_values(np.exp(-np.linspace(-1, 1, 21) ** 2), 64.0)
    write_spectrum(tmp_path / "s.csv", sd)
    back = read_spectrum(tmp_path / "s.csv")
    assert back.bandwidth == pytest.approx(64.0)
    np.testing.assert_allclose(back.values, sd.values, rtol=1e-10)
    write_table(tmp_path / "bad.csv", ("x", "y"), [(1, 2)])
    with pytest.raises(InvalidInputError):
        read_spectrum(tmp_path / "bad.csv")


def test_ticks():
    assert _ticks(0, 10) == [0, 2, 4, 6, 8, 10]
    assert _ticks(3, 3) == [3]
    t = _ticks(-0.37, 1.9)
    assert t[0] >= -0.37 and t[-1] <= 1.9 and len(t) >= 3


def test_line_chart_structure():
    svg = line_chart({"iid": [(1, 2.0, 0.5), (2, 3.0, 0.1)], "rake & co": [(1, 4.0, 0.0)]}, "x", "y <dB>", title="t")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert "rake &amp; co" in svg and "y &lt;dB&gt;" in svg
    with pytest.raises(ValueError):
        line_chart({}, "x", "y")


def test_constant_series_has_zero_height_bars():
    svg = line_chart({"a": [(1, 5.0, 0.0), (2, 5.0, 0.0)]}, "x", "y")
    bars = re.findall(r'<line x1="([\d.]+)" y1="([\d.]+)" x2="([\d.]+)" y2="([\d.]+)" stroke="#[0-9a-f]{6}"/>', svg)
    assert len(bars) == 2
    assert all(y1 == y2 for _, y1, _, y2 in bars)
