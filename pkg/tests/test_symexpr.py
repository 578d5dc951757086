import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkdirac.qi import QI
from kkdirac.symexpr import (
    Chart,
    Expr,
    Points,
    const,
    cos,
    differentiate,
    evaluate,
    evaluate_array,
    parse_infix,
    parse_sexpr,
    simplify,
    sin,
    sym,
    to_sexpr,
)

x, y = sym("x"), sym("y")


def test_qi_arithmetic():
    a = QI(Fraction(1, 2), 3)
    b = QI(-2, Fraction(1, 3))
    assert a * b == QI(Fraction(-1) - 1, Fraction(1, 6) - 6)
    assert (a / b) * b == a
    assert a.conjugate() == QI(Fraction(1, 2), -3)
    assert QI(0, 1) ** 2 == QI(-1)
    assert QI.parse(str(a)) == a


def test_qi_rejects_floats():
    with pytest.raises(TypeError):
        QI(0.5)


def test_canonical_form_collects_terms():
    assert (x * y + y * x - 2 * x * y).is_zero()
    assert (x + 1) * (x - 1) == x * x - 1


def test_trig_products_normalize():
    e = sin(x) ** 2 + cos(x) ** 2
    assert simplify(e) == const(1)
    assert simplify(2 * sin(x) * cos(x) - sin(2 * x)).is_zero()


def test_derivatives():
    assert differentiate(x**3 * y, "x") == 3 * x**2 * y
    assert differentiate(sin(x * y), "y") == x * cos(x * y)
    assert differentiate(cos(2 * x + y), "x") == -2 * sin(2 * x + y)
    assert differentiate(x ** -2, "x") == -2 * x ** -3


def test_reciprocal_of_monomial():
    e = (3 * x * y).reciprocal()
    assert simplify(e * 3 * x * y) == const(1)


def test_evaluate_matches_numpy():
    e = parse_infix("x**2*sin(y) - 1/3*cos(x*y) + I*y")
    v = evaluate(e, {"x": 0.3, "y": -1.1})
    ref = 0.09 * math.sin(-1.1) - math.cos(-0.33) / 3 + 1j * -1.1
    assert abs(v - ref) < 1e-14


def test_evaluate_array_shape():
    pts = Points({"x": [0.1, 0.2, 0.3], "y": [1.0, 2.0, 3.0]})
    arr = evaluate_array(np.array([[x, y], [x * y, const(2)]], dtype=object), pts)
    assert arr.shape == (3, 2, 2)
    assert np.allclose(arr[:, 1, 0], [0.1, 0.4, 0.9])


def test_missing_coordinate():
    with pytest.raises(KeyError):
        evaluate(x + y, {"x": 1.0})


def test_parse_infix_rejects_floats_and_unknowns():
    with pytest.raises(ValueError):
        parse_infix("0.5*x")
    with pytest.raises(ValueError):
        parse_infix("z", coords=("x", "y"))


def test_sexpr_round_trip():
    e = parse_infix("x**2*sin(y) - 1/3*cos(x*y) + I*y + 1/(2*x)")
    assert parse_sexpr(to_sexpr(e)) == e


def test_chart_sampling_is_seeded_and_inside_box():
    ch = Chart("c", ("x", "y"), ((0, 1), (-2, 2)))
    a, b = ch.sample(50, 3), ch.sample(50, 3)
    assert np.array_equal(a["x"], b["x"])
    assert a["x"].min() > 0 and a["x"].max() < 1
    assert ch.product(Chart("d", ("z",), ((0, 1),))).dim == 3


coef = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw):
    e = Expr()
    for _ in range(draw(st.integers(1, 4))):
        m = const(draw(coef))
        for v in (x, y):
            m = m * v ** draw(st.integers(0, 2))
        if draw(st.booleans()):
            m = m * sin(draw(st.integers(-2, 2)) * x + y)
        e = e + m
    return e


pt = st.tuples(st.floats(-1, 1), st.floats(-1, 1))


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), pt)
def test_product_rule(f, g, p):
    env = {"x": p[0], "y": p[1]}
    lhs = evaluate(differentiate(f * g, "x"), env)
    rhs = evaluate(differentiate(f, "x") * g + f * differentiate(g, "x"), env)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))


@settings(max_examples=40, deadline=None)
@given(polys(), pt)
def test_derivative_matches_finite_difference(f, p):
    h = 1e-6
    num = (evaluate(f, {"x": p[0] + h, "y": p[1]}) - evaluate(f, {"x": p[0] - h, "y": p[1]})) / (2 * h)
    ana = evaluate(differentiate(f, "x"), {"x": p[0], "y": p[1]})
    assert abs(num - ana) < 1e-5 * (1 + abs(ana))


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_mixed_partials_commute(f, g):
    e = f * g
    assert differentiate(differentiate(e, "x"), "y") == differentiate(differentiate(e, "y"), "x")
