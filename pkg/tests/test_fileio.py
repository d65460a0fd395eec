import json
import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GAU_WU, complex_matrices
from nrflat.fileio import (
    MatrixFileError,
    atomic_write,
    dumps,
    matrix_to_json,
    parse_matrix,
    read_matrix,
)
from nrflat.parallel import ordered_map, worker_count


@given(complex_matrices())
def test_matrix_round_trip(a):
    back = parse_matrix(dumps(matrix_to_json(a)))
    assert np.array_equal(back, a)


def test_imaginary_part_is_optional():
    a = parse_matrix('{"dim": 2, "re": [[1, 2], [3, 4]]}')
    assert np.array_equal(a, [[1, 2], [3, 4]])
    assert a.dtype == complex


@pytest.mark.parametrize("text, message", [
    ('{"dim": 2, "re": [[1, 2], [3]]}', "'re' row 1 has 1 entries, expected 2"),
    ('{"dim": 2, "re": [[1, 2]]}', "'re' must be a list of 2 rows"),
    ('{"dim": 0, "re": []}', "'dim' must be a positive integer"),
    ('{"dim": true, "re": [[1]]}', "'dim' must be a positive integer"),
    ('{"dim": 1, "re": [["x"]]}', "'re'[0][0] is not a number"),
    ('{"dim": 1, "re": [[1]], "im": [[NaN]]}', "'im'[0][0] is not finite"),
    ('[1, 2]', "top level must be an object"),
])
def test_validation_messages(text, message):
    with pytest.raises(MatrixFileError) as info:
        parse_matrix(text, "m.json")
    assert message in str(info.value)
    assert str(info.value).startswith("m.json")


def test_syntax_error_has_line_and_column():
    with pytest.raises(MatrixFileError, match=r"^m\.json:2:\d+: "):
        parse_matrix('{"dim": 1,\n "re": [[1]}', "m.json")


def test_missing_file(tmp_path):
    with pytest.raises(MatrixFileError, match="missing.json"):
        read_matrix(tmp_path / "missing.json")


def test_read_matrix(tmp_path):
    path = tmp_path / "gw.json"
    path.write_text(dumps(matrix_to_json(GAU_WU)))
    assert np.array_equal(read_matrix(path), GAU_WU)


def test_dumps_is_canonical():
    doc = {"b": 1.0, "a": [0.1, np.float64(2) / 3, 1e300], "c": complex(1, -2)}
    text = dumps(doc)
    assert text == dumps(dict(reversed(list(doc.items()))))
    back = json.loads(text)
    assert list(back) == ["a", "b", "c"]
    assert back["a"][1] == 2 / 3
    assert back["c"] == [1.0, -2.0]
    assert isinstance(back["b"], float)
    assert text.endswith("\n")


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_exactly(x):
    assert json.loads(dumps([x]))[0] == x


def test_non_finite_becomes_null():
    assert json.loads(dumps({"x": math.nan, "y": -math.inf, "z": None})) == {
        "x": None, "y": None, "z": None}


def test_dumps_rejects_unknown_types():
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_atomic_write_replaces_and_cleans_up(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    atomic_write(path, "new")
    assert path.read_text() == "new"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_atomic_write_failure_leaves_nothing(tmp_path):
    with pytest.raises(TypeError):
        atomic_write(tmp_path / "out.txt", 42)
    assert os.listdir(tmp_path) == []


def test_worker_count(monkeypatch):
    monkeypatch.delenv("NR_THREADS", raising=False)
    assert worker_count() == (os.cpu_count() or 1)
    assert worker_count(default=3) == 3
    monkeypatch.setenv("NR_THREADS", "2")
    assert worker_count() == 2
    monkeypatch.setenv("NR_THREADS", "0")
    assert worker_count() == (os.cpu_count() or 1)
    for bad in ("-1", "two"):
        monkeypatch.setenv("NR_THREADS", bad)
        with pytest.raises(ValueError, match="NR_THREADS"):
            worker_count()


def test_ordered_map_preserves_order():
    items = list(range(50))
    assert ordered_map(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert ordered_map(abs, [-3, 2, -1], workers=2, processes=True) == [3, 2, 1]
    assert ordered_map(abs, [], workers=4) == []
