import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbnb import expr as ex
from qbnb.errors import ParseError

x1, x2, x3 = ex.variables(3)


def test_hash_consing_gives_identity():
    assert (x1 + x2 * 3) is (x1 + x2 * 3)
    assert ex.sin(x1) is ex.sin(ex.var(0))


@pytest.mark.parametrize("built, expected", [
    (x1 + 0, x1),
    (0 * x1, ex.const(0)),
    (1 * x1, x1),
    (x1 - x1, ex.const(0)),
    (x1 ** 1, x1),
    (x1 ** 0, ex.const(1)),
    ((x1 ** 2) ** 3, x1 ** 6),
    (ex.const(2) * 3, ex.const(6)),
    (-(-x1), x1),
    (ex.sin(ex.const(0.0)), ex.const(0.0)),
])
def test_constructor_simplifications(built, expected):
    assert built is expected


def test_division_by_power_of_two_is_exact_multiply():
    assert (x1 / 4) is (0.25 * x1)


def test_evaluate_and_lambdify_agree(rng):
    e = ex.exp(-(x1 - 0.3) ** 2) * ex.cos(2 * x2) + ex.sqrt(1 + x3 ** 2) / (2 + ex.sin(x1 * x2))
    f_math = ex.lambdify(e)
    f_np = ex.lambdify(e, backend="numpy")
    pts = rng.uniform(-2, 2, size=(3, 50))
    ref = [ex.evaluate(e, p) for p in pts.T]
    np.testing.assert_allclose([f_math(p) for p in pts.T], ref, rtol=1e-14)
    np.testing.assert_allclose(f_np(pts), ref, rtol=1e-14)


def test_lambdify_tuple_of_outputs():
    fn = ex.lambdify([x1 * x2, ex.const(3.0), x2])
    assert fn([2.0, 5.0]) == (10.0, 3.0, 5.0)


def _fd(f, x, i, h=1e-6):
    xp, xm = np.array(x, float), np.array(x, float)
    xp[i] += h
    xm[i] -= h
    return (f(xp) - f(xm)) / (2 * h)


EXPRS = [
    x1 ** 3 * x2 - 4 * x1 * x3,
    ex.sin(x1) * ex.cos(x2 * x3),
    ex.exp(-(x1 ** 2 + x2 ** 2)) / (1 + x3 ** 2),
    ex.sqrt(2 + x1 ** 2 + x2 * x2),
    (x1 - 2 * x2) ** 4 + 1 / (3 + ex.cos(x3)),
]


@pytest.mark.parametrize("e", EXPRS, ids=lambda e: ex.to_text(e)[:30])
def test_derivatives_match_finite_differences(e, rng):
    cache = {}
    for _ in range(10):
        x = rng.uniform(-1, 1, size=3)
        for i in range(3):
            d = ex.differentiate(e, i, cache)
            ref = _fd(lambda y: ex.evaluate(e, y), x, i)
            assert math.isclose(ex.evaluate(d, x), ref, rel_tol=1e-6, abs_tol=1e-7)
            for j in range(3):
                dd = ex.differentiate(d, j, cache)
                ref2 = _fd(lambda y: ex.evaluate(d, y), x, j)
                assert math.isclose(ex.evaluate(dd, x), ref2, rel_tol=1e-5, abs_tol=1e-6)


def test_mixed_partials_commute():
    e = ex.sin(x1 * x2) * ex.exp(x3 * x1)
    c = {}
    a = ex.differentiate(ex.differentiate(e, 0, c), 2, c)
    b = ex.differentiate(ex.differentiate(e, 2, c), 0, c)
    for x in ([0.1, 0.2, 0.3], [-1.0, 2.0, 0.5]):
        assert math.isclose(ex.evaluate(a, x), ex.evaluate(b, x), rel_tol=1e-13)


def test_derivative_entries_multiplicities():
    entries = ex.derivative_entries(x1 * x2 * x3, 3, 3)
    assert sum(m for _, _, m in entries) == 27
    lookup = {idx: m for idx, _, m in entries}
    assert lookup[(0, 1, 2)] == 6
    assert lookup[(0, 0, 1)] == 3
    assert lookup[(1, 1, 1)] == 1


def test_derivative_of_constant_is_zero():
    assert ex.differentiate(ex.const(4.0), 0) is ex.const(0)
    assert ex.differentiate(x2, 0) is ex.const(0)


@pytest.mark.parametrize("text, x, value", [
    ("x1^2", [3.0], 9.0),
    ("x1**2 - 2*x1*x2 + x2^2", [3.0, 1.0], 4.0),
    ("-x1^2", [3.0], -9.0),
    ("2^3^2", [], 512.0),
    ("sin(pi/2) + cos(0) + exp(0) + sqrt(4)", [], 5.0),
    ("1/(x1 - 1)", [3.0], 0.5),
    ("1e-3*x1", [1000.0], 1.0),
])
def test_parse(text, x, value):
    assert math.isclose(ex.evaluate(ex.parse(text), x), value, rel_tol=1e-15)


@pytest.mark.parametrize("bad", ["x1^", "(x1", "x0", "foo(x1)", "x1 $ 2", "", "x1^-2", "x1^1.5"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        ex.parse(bad)


def test_parse_respects_dim():
    with pytest.raises(ParseError):
        ex.parse("x3", dim=2)


_leaf = st.one_of(
    st.sampled_from([x1, x2]),
    st.floats(-5, 5, allow_nan=False).map(ex.const),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: t[0] + t[1]),
        st.tuples(children, children).map(lambda t: t[0] - t[1]),
        st.tuples(children, children).map(lambda t: t[0] * t[1]),
        st.tuples(children, st.integers(0, 4)).map(lambda t: t[0] ** t[1]),
        children.map(ex.sin),
        children.map(ex.cos),
        children.map(lambda c: -c),
    )


exprs = st.recursive(_leaf, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(exprs, st.floats(-2, 2), st.floats(-2, 2))
def test_text_round_trip(e, a, b):
    back = ex.parse(ex.to_text(e))
    v1, v2 = ex.evaluate(e, [a, b]), ex.evaluate(back, [a, b])
    assert math.isclose(v1, v2, rel_tol=1e-12, abs_tol=1e-12 * (1 + abs(v1)))


@settings(max_examples=200, deadline=None)
@given(exprs, st.floats(-2, 2), st.floats(-2, 2))
def test_simplify_preserves_value(e, a, b):
    v1, v2 = ex.evaluate(e, [a, b]), ex.evaluate(ex.simplify(e), [a, b])
    assert math.isclose(v1, v2, rel_tol=1e-12, abs_tol=1e-12 * (1 + abs(v1)))
