import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkdirac.exterior import Coframe, Form, FrameVector, SingularFrameError, change_frame, d, hodge, interior, wedge
from kkdirac.symexpr import Chart, Expr, const, sin

CH3 = Chart("R3", ("x", "y", "z"), ((-1, 1),) * 3)
X, Y, Z = CH3.symbols()


def _eq(a: Form, b: Form) -> bool:
    return (a - b).is_zero()


def test_basis_sign_and_repeats():
    assert _eq(Form.basis(CH3, (1, 0)), -Form.basis(CH3, (0, 1)))
    assert Form.basis(CH3, (0, 0)).is_zero()


def test_d_of_x_dy():
    f = Form(CH3, 1, {(1,): X})
    assert _eq(d(f), Form.basis(CH3, (0, 1)))


def test_d_of_function():
    f = Form.scalar(CH3, X * Y**2 + sin(Z))
    df = d(f)
    assert df.component((0,)) == Y**2
    assert df.component((1,)) == 2 * X * Y
    assert df.component((2,)) == (sin(Z)).diff("z")


def test_wedge_graded_commutativity():
    a = Form.one_form(CH3, [X, Y, const(1)])
    b = Form.one_form(CH3, [Z, X * Y, Y])
    assert _eq(wedge(a, b), -wedge(b, a))
    assert wedge(a, a).is_zero()


def test_degree_overflow_is_zero():
    vol = Form.basis(CH3, (0, 1, 2))
    assert wedge(vol, Form.basis(CH3, (0,))).is_zero()


def test_matrix_valued_wedge_keeps_order():
    m1 = np.array([[const(1), const(0)], [const(0), const(0)]], dtype=object)
    m2 = np.array([[const(0), const(1)], [const(0), const(0)]], dtype=object)
    a = Form(CH3, 0, {(): m1}, (2, 2))
    b = Form(CH3, 0, {(): m2}, (2, 2))
    assert not wedge(a, b).is_zero()
    assert wedge(b, a).is_zero()


def test_interior_on_basis():
    e0 = FrameVector(CH3, (1, 0, 0))
    assert _eq(interior(e0, Form.basis(CH3, (0, 1))), Form.basis(CH3, (1,)))
    assert _eq(interior(e0, Form.basis(CH3, (1, 0))), -Form.basis(CH3, (1,)))


def test_change_frame_round_trip():
    V = np.array([[1 + X**2 / 4, const(0), const(0)], [const(0), const(1), X / 3], [Y / 5, const(0), const(2)]], dtype=object)
    cf = Coframe(CH3, V, (-1, 1, 1), (0, 1, 2), (0, 1, 2), "f")
    pts = CH3.sample(10, 0)
    a = Form(CH3, 2, {(0, 1): X * Y, (1, 2): const(3), (0, 2): Z})
    back = change_frame(change_frame(a, cf, pts, "frame"), cf, pts, "coord")
    assert (back - a.evaluate(pts)).max_abs() < 1e-12
    # the coframe itself has unit components in its own basis
    e1 = change_frame(cf.form(1), cf, pts, "frame")
    assert np.allclose(e1.component((1,)), 1) and np.allclose(e1.component((2,)), 0)


def test_singular_frame_raises():
    V = np.array([[const(1), const(0), const(0)], [const(0), const(1), const(0)], [const(0), const(0), X - X]], dtype=object)
    cf = Coframe(CH3, V, (-1, 1, 1), (0, 1, 2), (0, 1, 2), "f")
    with pytest.raises(SingularFrameError):
        cf.matrices(CH3.sample(4, 0))


def _double_hodge_ok(sig, orientation):
    n = len(sig)
    ch = Chart("c", tuple(f"u{i}" for i in range(n)), ((-1, 1),) * n)
    labels = tuple(range(n))
    V = np.array([[const(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    cf = Coframe(ch, V, sig, labels, orientation, "f")
    s = int(np.prod(sig))
    for p in range(n + 1):
        for idx in itertools.combinations(range(n), p):
            b = Form.basis(ch, idx, "f")
            if not _eq(hodge(hodge(b, cf), cf), b * ((-1) ** (p * (n - p)) * s)):
                return False
            # alpha ^ *alpha = <alpha, alpha> vol
            norm = int(np.prod([sig[i] for i in idx])) if idx else 1
            if not _eq(wedge(b, hodge(b, cf)), cf.volume() * norm):
                return False
    return True


@pytest.mark.parametrize(
    "sig,orientation",
    [((-1, 1, 1), (0, 1, 2)), ((1, 1, 1), (1, 0, 2)), ((-1, 1, 1, 1, 1, 1), (0, 1, 2, 3, 4, 5)), ((-1, 1, 1, 1, 1, 1), (0, 1, 2, 4, 3, 5))],
)
def test_double_hodge_sign_law(sig, orientation):
    assert _double_hodge_ok(sig, orientation)


# -- property tests -----------------------------------------------------------

coef = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def scalars(draw):
    e = Expr()
    for _ in range(draw(st.integers(1, 3))):
        m = const(draw(coef))
        for v in (X, Y, Z):
            m = m * v ** draw(st.integers(0, 2))
        e = e + m
    if draw(st.booleans()):
        e = e + sin(X + draw(st.integers(-2, 2)) * Z)
    return e


@st.composite
def forms(draw, degree=None):
    p = draw(st.integers(0, 3)) if degree is None else degree
    comps = {idx: draw(scalars()) for idx in itertools.combinations(range(3), p) if draw(st.booleans())}
    return Form(CH3, p, comps)


@settings(max_examples=25, deadline=None)
@given(forms())
def test_d_squared_vanishes(a):
    assert d(d(a)).is_zero()


@settings(max_examples=25, deadline=None)
@given(forms(), forms())
def test_leibniz_d(a, b):
    lhs = d(wedge(a, b))
    rhs = wedge(d(a), b) + wedge(a, d(b)) * (-1) ** a.degree
    assert _eq(lhs, rhs)


@settings(max_examples=25, deadline=None)
@given(forms(), forms(), st.tuples(scalars(), scalars(), scalars()))
def test_leibniz_interior(a, b, comps):
    v = FrameVector(CH3, comps)
    lhs = interior(v, wedge(a, b))
    rhs = wedge(interior(v, a), b) + wedge(a, interior(v, b)) * (-1) ** a.degree
    assert _eq(lhs, rhs)


@settings(max_examples=25, deadline=None)
@given(forms(), st.tuples(scalars(), scalars(), scalars()))
def test_interior_squared_vanishes(a, comps):
    v = FrameVector(CH3, comps)
    assert interior(v, interior(v, a)).is_zero()
