from __future__ import annotations

import numpy as np
import pytest

from hsbeta.errors import ParameterError
from hsbeta.io import read_json, read_matrix, read_vector, write_json, write_matrix, write_vector


def test_matrix_round_trip_is_exact(rng, tmp_path):
    X = rng.normal(size=(7, 3)) * np.array([1e-300, 1.0, 1e300])
    path = write_matrix(tmp_path / "X.csv", X)
    assert path.read_text().splitlines()[0] == "x1,x2,x3"
    assert np.array_equal(read_matrix(path), X)


def test_vector_round_trip(rng, tmp_path):
    v = rng.uniform(size=11)
    path = write_vector(tmp_path / "y.csv", v, "y")
    assert path.read_text().startswith("y\n")
    assert np.array_equal(read_vector(path), v)


@pytest.mark.parametrize("content,msg", [
    ("", "empty"),
    ("x1,x2\n", "no data"),
    ("x1,x2\n1,2\n3\n", "inconsistent"),
    ("x1\nabc\n", "non-numeric"),
])
def test_malformed_matrices(tmp_path, content, msg):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(ParameterError, match=msg):
        read_matrix(path)


def test_vector_needs_one_column(tmp_path):
    path = write_matrix(tmp_path / "two.csv", np.ones((2, 2)))
    with pytest.raises(ParameterError, match="one column"):
        read_vector(path)


def test_json_is_deterministic(tmp_path):
    obj = {"b": np.float64(1.5), "a": np.arange(3), "c": {"z": np.bool_(True), "y": None}}
    a = write_json(tmp_path / "a.json", obj).read_bytes()
    b = write_json(tmp_path / "b.json", dict(reversed(list(obj.items())))).read_bytes()
    assert a == b and a.endswith(b"\n")
    assert read_json(tmp_path / "a.json") == {"a": [0, 1, 2], "b": 1.5, "c": {"y": None, "z": True}}


def test_json_refuses_nan(tmp_path):
    with pytest.raises(ValueError):
        write_json(tmp_path / "n.json", {"x": float("nan")})


def test_invalid_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(ParameterError, match="not valid JSON"):
        read_json(path)
