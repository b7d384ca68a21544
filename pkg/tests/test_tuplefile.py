import numpy as np
import pytest
from hypothesis import given

from conftest import tuples
from quasinormal.core import OperatorTuple, SubspaceBasis
from quasinormal.models import gallery
from quasinormal.tuplefile import (TupleFileError, dumps_subspace, dumps_tuple,
                                   loads_grid, loads_subspace, loads_tuple,
                                   read_tuple, write_tuple)

JORDAN_TEXT = """{
  "name": "jordan2",
  "d": 1,
  "dim": 2,
  "matrices": [
    [
      [[0.0, 0.0], [1.0, 0.0]],
      [[0.0, 0.0], [0.0, 0.0]]
    ]
  ],
  "expected": {"spherically_qn": false}
}
"""


def test_canonical_round_trip_is_byte_identical():
    tf = loads_tuple(JORDAN_TEXT)
    assert tf.name == "jordan2"
    assert tf.expected == {"spherically_qn": False}
    assert np.array_equal(tf.tuple[0], [[0, 1], [0, 0]])
    assert dumps_tuple(tf.tuple, tf.name, tf.expected) == JORDAN_TEXT


@given(tuples(max_dim=4))
def test_round_trip_values(T):
    text = dumps_tuple(T)
    back = loads_tuple(text).tuple
    assert back == T
    assert dumps_tuple(back) == text


def test_gallery_round_trip(tmp_path):
    for e in gallery():
        path = tmp_path / f"{e.name}.json"
        write_tuple(path, e.T, e.name, e.expected)
        tf = read_tuple(path)
        assert tf.tuple == e.T and tf.expected == e.expected
        assert dumps_tuple(tf.tuple, tf.name, tf.expected) == path.read_text()


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    '{"d": 1, "dim": 1}',
    '{"d": 1, "dim": 1, "matrices": [[[[NaN, 0]]]]}',
    '{"d": 1, "dim": 1, "matrices": [[[[Infinity, 0]]]]}',
    '{"d": 1, "dim": 1, "matrices": [[[[1e400, 0]]]]}',
    '{"d": 2, "dim": 1, "matrices": [[[[1, 0]]]]}',
    '{"d": 1, "dim": 2, "matrices": [[[[1, 0]]]]}',
    '{"d": 1, "dim": 1, "matrices": [[[[1, 0, 0]]]]}',
    '{"d": 1, "dim": 1, "matrices": [[[["1", 0]]]]}',
    '{"d": 1, "dim": 1, "matrices": [[[[true, 0]]]]}',
    '{"d": 0, "dim": 1, "matrices": []}',
    '{"d": 1, "dim": 1, "matrices": [[[[1, 0]]]], "expected": 3}',
])
def test_malformed_input(text):
    with pytest.raises(TupleFileError):
        loads_tuple(text)


def test_missing_file(tmp_path):
    with pytest.raises(TupleFileError):
        read_tuple(tmp_path / "absent.json")


class TestSubspace:
    def test_round_trip(self):
        H = SubspaceBasis.from_span(np.array([[1, 0], [1j, 0], [0, 1]]))
        back = loads_subspace(dumps_subspace(H), 3)
        assert back.same_as(H)

    def test_span_is_orthonormalized(self):
        H = loads_subspace('{"dim": 2, "columns": [[[1, 0], [1, 0]], [[2, 0], [2, 0]]]}')
        assert H.m == 1

    def test_dimension_mismatch(self):
        with pytest.raises(TupleFileError):
            loads_subspace('{"dim": 2, "columns": [[[1, 0], [0, 0]]]}', 3)

    def test_missing_columns(self):
        with pytest.raises(TupleFileError):
            loads_subspace('{"dim": 2}')


class TestGrid:
    def test_list_and_object_forms(self):
        a = loads_grid("[[[1, 0], [3, 0]], [[2, 0], [4, 1]]]", 2)
        b = loads_grid('{"points": [[[1, 0], [3, 0]], [[2, 0], [4, 1]]]}', 2)
        assert np.array_equal(a, b)
        assert a.shape == (2, 2) and a[1, 1] == 4 + 1j

    def test_wrong_arity(self):
        with pytest.raises(TupleFileError):
            loads_grid("[[[1, 0]]]", 2)

    def test_empty_grid(self):
        assert loads_grid("[]", 3).shape == (0, 3)
