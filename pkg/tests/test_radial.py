import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radialfrac.exceptions import DocumentError
from radialfrac.radial import (
    LevelGrid,
    MatrixRadialFunction,
    RadialFunction,
    Tail,
    constant_function,
    deserialize,
    dumps,
    from_document,
    loads,
    matrix_from_document,
    matrix_to_document,
    serialize,
    sphere_indicator,
    to_document,
    vector_from_document,
    vector_to_document,
)


def test_level_grid_validation():
    assert LevelGrid(-2, 3).size == 6
    assert list(LevelGrid(0, 2).levels) == [0, 1, 2]
    with pytest.raises(ValueError):
        LevelGrid(3, 2)


def test_single_level_constant_and_indicator():
    one = RadialFunction((0, 0), [1.0], 1.0, Tail.constant(1.0))
    assert one.eval_at_level(-100) == 1
    assert one.eval_at_level(100) == 1
    ind = RadialFunction((0, 0), [1.0], 0.0, Tail.zero())
    assert ind.eval_at_level(0) == 1
    assert ind.eval_at_level(-1) == 0
    assert ind.eval_at_level(1) == 0


def test_mismatched_lengths_raise():
    with pytest.raises(ValueError):
        RadialFunction((0, 2), [1.0, 2.0], 0.0, Tail.zero())


def test_nonfinite_values_raise():
    with pytest.raises(ValueError):
        RadialFunction((0, 1), [1.0, np.nan], 0.0, Tail.zero())


def test_eval_head_tail_and_lookup():
    assert constant_function((-3, 3), 1.0).eval_at_level(-100) == 1
    assert sphere_indicator((-3, 3), 0).eval_at_level(50) == 0
    u = RadialFunction((-2, 2), [5, 6, 7, 8, 9], 0.0, Tail.zero())
    assert u.eval_at_level(-2) == 5
    assert list(u([-5, -2, 2, 3])) == [0, 5, 9, 0]


def test_values_are_read_only():
    u = constant_function((0, 2), 1.0)
    with pytest.raises(ValueError):
        u.values[0] = 3


def test_tail_models():
    assert Tail.constant(2).value(7) == 2
    assert Tail.power(1, 2, 0.5).value(3) == pytest.approx(1 + 2 * 0.125)
    assert Tail.log(1, 2).value(3) == 7
    assert Tail.zero().vanishes and not Tail.constant(1).vanishes
    assert Tail.power(1, 2, 0.5).rebased(2).value(1) == Tail.power(1, 2, 0.5).value(3)


def test_widened_is_exact():
    u = RadialFunction((-1, 1), [1, 2, 3], 0.5, Tail.power(0, 3, 0.25))
    w = u.widened(-4, 4)
    for n in range(-8, 9):
        assert w.eval_at_level(n) == u.eval_at_level(n)
    with pytest.raises(ValueError):
        u.widened(0, 4)


def test_shifted_reads_higher_levels():
    u = RadialFunction((0, 2), [1, 2, 3], 0.0, Tail.zero())
    s = u.shifted(2)
    assert s.grid == LevelGrid(-2, 0)
    assert s.eval_at_level(-2) == u.eval_at_level(0)


def test_arithmetic():
    g = (-2, 2)
    u = sphere_indicator(g, 0)
    v = constant_function(g, 2.0)
    w = u + v
    assert w.eval_at_level(0) == 3 and w.eval_at_level(10) == 2
    assert (w - v) == u
    assert (2 * u).eval_at_level(0) == 2
    with pytest.raises(ValueError):
        u + sphere_indicator((-1, 1), 0)


def test_round_trip_constant():
    one = constant_function((-5, 5), 1.0)
    assert deserialize(serialize(one)) == one


def test_document_missing_tail_raises():
    doc = to_document(constant_function((0, 0), 1.0))
    del doc["tail"]
    with pytest.raises(DocumentError, match="tail"):
        from_document(doc)


def test_document_reads_pairs():
    u = from_document(
        {"n_min": 0, "n_max": 0, "values": [[1.0, 0.0]], "value_at_zero": [0, 0], "tail": {"kind": "zero"}}
    )
    assert u.values[0] == 1 + 0j


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: d.update(values=[[1.0]]), "pair"),
        (lambda d: d.update(values=[]), "entries"),
        (lambda d: d.update(n_min=0.5), "integers"),
        (lambda d: d.update(tail={"kind": "weird"}), "unknown kind"),
        (lambda d: d.update(tail={"kind": "constant"}), "'c'"),
    ],
)
def test_bad_documents(mutate, match):
    doc = {"n_min": 0, "n_max": 0, "values": [[1.0, 0.0]], "value_at_zero": [0, 0], "tail": {"kind": "zero"}}
    mutate(doc)
    with pytest.raises(DocumentError, match=match):
        from_document(doc)


def test_loads_rejects_nan():
    with pytest.raises(DocumentError):
        loads('{"x": NaN}')
    with pytest.raises(DocumentError):
        loads("{not json")


def test_dumps_writes_17_significant_digits():
    text = dumps({"x": 0.1, "n": 3, "y": 2.0, "b": True})
    assert text == '{"x": 0.10000000000000001, "n": 3, "y": 2.0, "b": true}\n'
    assert json.loads(text)["x"] == 0.1


complex_st = st.complex_numbers(max_magnitude=1e12, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(
    n_min=st.integers(-50, 50),
    values=st.lists(complex_st, min_size=1, max_size=12),
    at_zero=complex_st,
    tail=st.one_of(
        st.just(Tail.zero()),
        complex_st.map(Tail.constant),
        st.tuples(complex_st, complex_st, st.floats(0.01, 10)).map(lambda t: Tail.power(*t)),
        st.tuples(complex_st, complex_st).map(lambda t: Tail.log(*t)),
    ),
)
def test_serialization_round_trip_is_lossless(n_min, values, at_zero, tail):
    u = RadialFunction((n_min, n_min + len(values) - 1), values, at_zero, tail)
    assert deserialize(serialize(u, q=3, alpha=0.5)) == u


def test_matrix_function_and_documents():
    g = LevelGrid(-1, 1)
    vals = np.arange(12, dtype=complex).reshape(3, 2, 2)
    a = MatrixRadialFunction(g, vals, np.eye(2))
    assert a.dim == 2
    assert np.array_equal(a.eval_at_level(-5), np.eye(2))
    assert np.array_equal(a.eval_at_level(5), np.zeros((2, 2)))
    assert a.entry(0, 1).eval_at_level(1) == 9
    back = matrix_from_document(loads(dumps(matrix_to_document(a, q=2))))
    assert back == a


def test_matrix_from_scalar():
    u = RadialFunction((0, 1), [1, 2], 3, Tail.constant(4))
    m = MatrixRadialFunction.from_scalar(u)
    assert m.dim == 1 and m.eval_at_level(10)[0, 0] == 4 and m.eval_at_level(-10)[0, 0] == 3


def test_vector_documents():
    comps = (sphere_indicator((0, 2), 1), constant_function((0, 2), 2.0))
    back = vector_from_document(loads(dumps(vector_to_document(comps))))
    assert back == comps
    with pytest.raises(DocumentError):
        vector_from_document({"dim": 3, "components": [to_document(c) for c in comps]})
