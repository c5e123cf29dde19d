import json

import pytest

from tilinglab.report import canonical_json, render_histogram, report_csv


def test_canonical_json_sorted_and_newline_terminated():
    text = canonical_json({"b": 1, "a": [1, 2], "c": None})
    assert text == '{"a":[1,2],"b":1,"c":null}\n'
    assert json.loads(text) == {"a": [1, 2], "b": 1, "c": None}


def test_canonical_json_float_formatting_is_stable():
    assert canonical_json(0.1) == "0.10000000000000001\n"
    assert canonical_json({"x": 1.0}) == '{"x":1}\n'
    # round trip preserves the exact double
    assert json.loads(canonical_json(1 / 3)) == 1 / 3


def test_canonical_json_rejects_bad_values():
    with pytest.raises(ValueError):
        canonical_json(float("nan"))
    with pytest.raises(ValueError):
        canonical_json(float("inf"))
    with pytest.raises(ValueError):
        canonical_json({1: "non-string key"})
    with pytest.raises(ValueError):
        canonical_json(object())


def test_canonical_json_escapes_strings():
    text = canonical_json({"s": 'a"b\\c\n'})
    assert json.loads(text) == {"s": 'a"b\\c\n'}


def test_report_csv_field_order_and_lists():
    rows = [{"b": 2, "a": 1.5, "h": [1, 2, 3]}]
    text = report_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "a,b,h"
    assert lines[1] == "1.5,2,1 2 3"
    assert report_csv([]) == ""


def test_report_csv_explicit_fields():
    text = report_csv([{"x": 1, "y": 2}], fields=["y", "x"])
    assert text.splitlines()[0] == "y,x"


def test_render_histogram_writes_png(tmp_path):
    path = str(tmp_path / "hist.png")
    render_histogram((1, 0, 4, 0, 1), path, title="test")
    data = open(path, "rb").read()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
