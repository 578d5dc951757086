from fractions import Fraction

import numpy as np
import pytest

from kkdirac.exterior import SingularFrameError, d
from kkdirac.geometry import (
    SPACETIME_LABELS,
    SPHERE_LABELS,
    assemble_kk,
    bianchi_check,
    curvature,
    custom_spacetime,
    potential_from_strings,
    sample_regular,
    solve_levi_civita,
    sphere_model,
    structure_residual,
    verify_connection_decomposition,
    verify_geometry,
    verify_hodge_decomposition,
    verify_interior_decomposition,
)


def test_lambda_measured_exactly(sphere):
    assert sphere.lam_exact == Fraction(1, 2)
    assert sphere.lam_spread < 1e-10


def test_left_invariant_frame_has_opposite_lambda():
    left = sphere_model("left")
    assert left.lam_exact is not None and abs(left.lam_exact) == Fraction(1, 2)


def test_structure_equations(geom42):
    pts = geom42.sample(30, 42)
    conn = solve_levi_civita(geom42.coframe, pts)
    for r in structure_residual(conn).values():
        assert r.max_abs() < 1e-9


def test_zero_potential_gives_block_diagonal_connection(geom0):
    pts = geom0.sample(10, 1)
    conn = solve_levi_civita(geom0.coframe, pts)
    for a in SPACETIME_LABELS:
        for b in SPHERE_LABELS:
            assert conn(a, b).max_abs() < 1e-14
    for a in SPACETIME_LABELS:
        for b in SPACETIME_LABELS:
            assert conn(a, b).max_abs() < 1e-14


def test_connection_antisymmetric(geom42):
    pts = geom42.sample(5, 0)
    conn = solve_levi_civita(geom42.coframe, pts)
    assert (conn(0, 6) + conn(6, 0)).max_abs() == 0
    assert conn(5, 5).is_zero()


def test_decompositions(geom42):
    pts = geom42.sample(30, 42)
    conn = solve_levi_civita(geom42.coframe, pts)
    checks = verify_connection_decomposition(geom42, conn) + verify_interior_decomposition(geom42, pts) + verify_hodge_decomposition(geom42, pts)
    assert all(c.passed for c in checks), [c.name for c in checks if not c.passed]


def test_flipped_sphere_orientation_breaks_hodge_decomposition(geom42):
    pts = geom42.sample(10, 3)
    checks = verify_hodge_decomposition(geom42, pts, sphere_orientation=(6, 5, 7))
    assert not all(c.passed for c in checks)


def test_curvature_of_abelian_potential_is_dA(spacetime):
    A = potential_from_strings(spacetime.chart, [["x1", "0", "0"], ["0", "0", "0"], ["0", "0", "0"]])
    F = curvature(A, spacetime)
    assert (F.forms[5] - d(A.form(5, spacetime))).is_zero()
    assert F.forms[6].is_zero() and F.forms[7].is_zero()


def test_curvature_quadratic_term(spacetime):
    # constant non-abelian potential: F = 1/2 eps A ^ A only
    A = potential_from_strings(spacetime.chart, [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "0"]])
    F = curvature(A, spacetime)
    assert F.forms[5].is_zero() and F.forms[6].is_zero()
    assert not F.forms[7].is_zero()


def test_bianchi(geom42, spacetime):
    pts = spacetime.chart.sample(20, 0)
    checks = bianchi_check(geom42.potential, spacetime, pts)
    assert all(c.passed and c.detail["exact_zero"] for c in checks)


def test_curved_spacetime_suite(sphere):
    st = custom_spacetime([["1 + x1**2/4", "0", "0"], ["0", "1", "x0/3"], ["0", "0", "1 + x0*x1/5"]])
    A = potential_from_strings(st.chart, [["x1", "0", "x0*x2/2"], ["0", "x2**2", "-x0"], ["1/3", "x0 - x1", "0"]])
    checks, info = verify_geometry(assemble_kk(st, sphere, A), n=20, seed=5)
    assert all(c.passed for c in checks), [c.name for c in checks if not c.passed]


def test_singular_vielbein_raises(sphere):
    st = custom_spacetime([["1", "0", "0"], ["0", "1", "0"], ["0", "0", "0"]])
    with pytest.raises(SingularFrameError):
        sample_regular(st.coframe, 5, 0)


def test_sampling_avoids_isolated_singularities():
    st = custom_spacetime([["x0", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])
    pts = sample_regular(st.coframe, 50, 0)
    assert np.all(np.abs(pts["x0"]) > 1e-10)
