"""Manifold models for M^{1+2} x S^3 and the Kaluza-Klein bundle coframe.

Index conventions used throughout:

* spacetime frame labels ``0, 1, 2`` with signature ``(-, +, +)``;
* sphere frame labels ``5, 6, 7`` with signature ``(+, +, +)``;
* a gauge potential ``A_alpha = A_alpha^a e_a`` is stored as the 3x3 table of
  coefficients ``A[alpha][a]`` of the basis 1-forms ``e_a``.  Lowering the
  Latin index gives ``A_{alpha a} = eta_aa A_alpha^a``; this is the quantity
  that appears as ``A^alpha_a`` in the interior-product and Hodge splittings;
* frame vectors are dual to the raised coframe: ``iota_{X_A} E_B = eta_AB``.

The sphere coframe comes from the right-invariant Maurer-Cartan form
``dG G^{-1} = e_alpha X_alpha`` with ``X_alpha = (i/2) gamma^alpha``.  Its
structure constant ``lambda`` in ``de_alpha = lambda eps_alpha^{beta gamma}
e_beta ^ e_gamma`` is measured, not assumed.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .clifford import build_gamma_0_3, levi_civita, su2_basis, su2_euler, SU2Element
from .exterior import Coframe, Form, FrameVector, SingularFrameError, change_frame, d, hodge, interior, wedge
from .qi import QI
from .report import Check, residual_check
from .symexpr import Chart, Expr, Points, const, evaluate_array, parse_infix

log = logging.getLogger(__name__)

__all__ = [
    "SpacetimeModel",
    "SphereModel",
    "GaugePotential",
    "KKGeometry",
    "ConnectionForms",
    "CurvatureForms",
    "SPACETIME_LABELS",
    "SPHERE_LABELS",
    "flat_spacetime",
    "custom_spacetime",
    "sphere_model",
    "maurer_cartan_coframe",
    "zero_potential",
    "random_polynomial_potential",
    "potential_from_strings",
    "assemble_kk",
    "solve_levi_civita",
    "structure_residual",
    "curvature",
    "bianchi_check",
    "verify_connection_decomposition",
    "verify_interior_decomposition",
    "verify_hodge_decomposition",
    "verify_geometry",
    "sample_regular",
    "eps3",
]

SPACETIME_LABELS = (0, 1, 2)
SPHERE_LABELS = (5, 6, 7)
ETA3 = (-1, 1, 1)


def eps3(a, b, c) -> int:
    """Levi-Civita symbol on the sphere labels (eps_567 = +1)."""
    return levi_civita(a, b, c)


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpacetimeModel:
    chart: Chart
    coframe: Coframe
    scenario: str = "flat"


def _spacetime_chart(box=1):
    return Chart("M3", ("x0", "x1", "x2"), ((-box, box),) * 3)


def flat_spacetime(box: float = 1.0) -> SpacetimeModel:
    """Flat M^{1+2} with the coordinate coframe e_a = dx^a."""
    ch = _spacetime_chart(box)
    V = np.array([[const(int(i == j)) for j in range(3)] for i in range(3)], dtype=object)
    return SpacetimeModel(ch, Coframe(ch, V, ETA3, SPACETIME_LABELS, SPACETIME_LABELS, "e3"), "flat")


def custom_spacetime(rows, box: float = 1.0) -> SpacetimeModel:
    """Spacetime with vielbein rows given as expression strings or Exprs in x0, x1, x2."""
    ch = _spacetime_chart(box)
    V = np.empty((3, 3), dtype=object)
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise ValueError("vielbein rows need three entries")
        for j, v in enumerate(row):
            V[i, j] = parse_infix(v, ch.coords) if isinstance(v, str) else (v if isinstance(v, Expr) else const(v))
    return SpacetimeModel(ch, Coframe(ch, V, ETA3, SPACETIME_LABELS, SPACETIME_LABELS, "e3"), "custom")


@dataclass(frozen=True, eq=False)
class SphereModel:
    chart: Chart
    G: SU2Element
    coframe: Coframe
    lam: float
    lam_components: tuple
    lam_exact: Fraction | None
    invariance: str = "right"

    @property
    def lam_spread(self) -> float:
        return float(max(self.lam_components) - min(self.lam_components))


def _sphere_chart():
    return Chart("S3", ("theta", "phi", "psi"), ((0, math.pi), (0, 2 * math.pi), (0, 4 * math.pi)))


def maurer_cartan_coframe(G: SU2Element, chart: Chart, invariance: str = "right") -> np.ndarray:
    """Vielbein rows of e_alpha from ``dG G^{-1}`` (right) or ``G^{-1} dG`` (left).

    The su(2) valued 1-form is expanded as ``sum_alpha e_alpha X_alpha`` with
    ``X_alpha = (i/2) gamma^alpha``; since ``tr(X_alpha gamma^beta) = i delta``,
    ``e_beta = -i tr(M gamma^beta)``.  Expansion residues and imaginary parts
    are checked exactly.
    """
    if invariance not in ("right", "left"):
        raise ValueError("invariance must be 'right' or 'left'")
    gS = build_gamma_0_3()
    X = su2_basis(gS)
    Ginv = G.inverse()
    minus_i = QI(0, -1)
    V = np.empty((3, 3), dtype=object)
    for j, c in enumerate(chart.coords):
        dG = np.vectorize(lambda e: e.diff(c), otypes=[object])(G.matrix)
        M = dG @ Ginv if invariance == "right" else Ginv @ dG
        coeffs = []
        for k, al in enumerate(SPHERE_LABELS):
            g = gS[al]
            tr = Expr()
            for p in range(2):
                for q in range(2):
                    if g[q, p]:
                        tr = tr + M[p, q] * const(g[q, p])
            e = tr * const(minus_i)
            if e != e.conjugate():
                raise ArithmeticError("Maurer-Cartan coefficient is not real")
            V[k, j] = e
            coeffs.append(e)
        for p in range(2):
            for q in range(2):
                acc = M[p, q]
                for e, al in zip(coeffs, SPHERE_LABELS):
                    if X[al][p, q]:
                        acc = acc - e * const(X[al][p, q])
                if not acc.is_zero():
                    raise ArithmeticError("Maurer-Cartan form does not lie in su(2)")
    return V


def sphere_model(invariance: str = "right", n: int = 20, seed: int = 0) -> SphereModel:
    """Unit-group S^3 with the Maurer-Cartan coframe and measured lambda."""
    ch = _sphere_chart()
    th, ph, ps = ch.symbols()
    G = su2_euler(th, ph, ps)
    V = maurer_cartan_coframe(G, ch, invariance)
    cf = Coframe(ch, V, (1, 1, 1), SPHERE_LABELS, SPHERE_LABELS, f"e_S3_{invariance}")
    lam, comps, exact = _measure_lambda(cf, n, seed)
    return SphereModel(ch, G, cf, lam, comps, exact, invariance)


def _eps_ee(cf: Coframe, al):
    """Symbolic ``eps_alpha^{beta gamma} e_beta ^ e_gamma`` in coordinates."""
    out = Form.zero(cf.chart, 2)
    for be in SPHERE_LABELS:
        for ga in SPHERE_LABELS:
            s = eps3(al, be, ga)
            if s:
                out = out + wedge(cf.form(be), cf.form(ga)) * s
    return out


def _measure_lambda(cf: Coframe, n: int, seed: int):
    pts = cf.chart.sample(n, seed)
    comps = []
    des, ws = [], []
    for al in SPHERE_LABELS:
        de = d(cf.form(al))
        w = _eps_ee(cf, al)
        des.append(de)
        ws.append(w)
        keys = sorted(set(de.components) | set(w.components))
        dv = de.evaluate(pts)
        wv = w.evaluate(pts)
        a = np.concatenate([dv.components.get(k, np.zeros(n, complex)).ravel() for k in keys])
        b = np.concatenate([wv.components.get(k, np.zeros(n, complex)).ravel() for k in keys])
        lam = float(np.real(np.vdot(b, a) / np.vdot(b, b)))
        comps.append(lam)
    guess = Fraction(float(np.mean(comps))).limit_denominator(64)
    exact = guess
    for de, w in zip(des, ws):
        if not (de - w * const(guess)).is_zero():
            exact = None
            break
    return float(np.mean(comps)), tuple(comps), exact


# ---------------------------------------------------------------------------
# gauge potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaugePotential:
    """``A_alpha = A[alpha][a] e_a`` on the spacetime chart (alpha in 5,6,7; a in 0,1,2)."""

    chart: Chart
    table: tuple  # 3 rows (alpha) of 3 Expr (a)

    def coeff(self, alpha, a) -> Expr:
        return self.table[SPHERE_LABELS.index(alpha)][SPACETIME_LABELS.index(a)]

    def lowered(self, alpha, a) -> Expr:
        return self.coeff(alpha, a) * ETA3[SPACETIME_LABELS.index(a)]

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.table for e in row)

    def form(self, alpha, spacetime: SpacetimeModel) -> Form:
        """``A_alpha`` as a coordinate-frame 1-form on the spacetime chart."""
        cf = spacetime.coframe
        out = Form.zero(self.chart, 1)
        for a in SPACETIME_LABELS:
            c = self.coeff(alpha, a)
            if not c.is_zero():
                out = out + cf.form(a) * c
        return out

    def to_strings(self):
        return [[str(e) for e in row] for row in self.table]


def zero_potential(chart: Chart) -> GaugePotential:
    return GaugePotential(chart, tuple(tuple(Expr() for _ in range(3)) for _ in range(3)))


def random_polynomial_potential(chart: Chart, seed: int, degree: int = 2, max_num: int = 5, max_den: int = 4) -> GaugePotential:
    """Seeded polynomials of total degree <= ``degree`` with small rational coefficients."""
    rng = np.random.default_rng(seed)
    xs = chart.symbols()
    monos = [Expr.one()]
    for deg in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(len(xs)), deg):
            m = Expr.one()
            for i in combo:
                m = m * xs[i]
            monos.append(m)
    rows = []
    for _ in SPHERE_LABELS:
        row = []
        for _ in SPACETIME_LABELS:
            e = Expr()
            for m in monos:
                num = int(rng.integers(-max_num, max_num + 1))
                den = int(rng.integers(1, max_den + 1))
                if num:
                    e = e + m * const(Fraction(num, den))
            row.append(e)
        rows.append(tuple(row))
    return GaugePotential(chart, tuple(rows))


def potential_from_strings(chart: Chart, rows) -> GaugePotential:
    if len(rows) != 3 or any(len(r) != 3 for r in rows):
        raise ValueError("gauge potential needs a 3x3 table (alpha = 5,6,7 by a = 0,1,2)")
    return GaugePotential(
        chart, tuple(tuple(parse_infix(str(v), chart.coords) if not isinstance(v, Expr) else v for v in r) for r in rows)
    )


# ---------------------------------------------------------------------------
# Kaluza-Klein bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KKGeometry:
    spacetime: SpacetimeModel
    sphere: SphereModel
    potential: GaugePotential
    chart: Chart
    coframe: Coframe

    @property
    def labels(self):
        return self.coframe.labels

    def sample(self, n: int, seed: int) -> Points:
        return sample_regular(self.coframe, n, seed)


def assemble_kk(spacetime: SpacetimeModel, sphere: SphereModel, A: GaugePotential) -> KKGeometry:
    """Bundle coframe ``E_a = e_a``, ``E_alpha = e_alpha + A_alpha``."""
    if A.chart != spacetime.chart:
        raise ValueError("gauge potential must live on the spacetime chart")
    ch = spacetime.chart.product(sphere.chart, "M3xS3")
    V3, VS = spacetime.coframe.vielbein, sphere.coframe.vielbein
    V = np.empty((6, 6), dtype=object)
    for i in range(6):
        for j in range(6):
            V[i, j] = Expr()
    for a in range(3):
        for j in range(3):
            V[a, j] = V3[a, j]
    for k, al in enumerate(SPHERE_LABELS):
        for j in range(3):
            acc = Expr()
            for b, lb in enumerate(SPACETIME_LABELS):
                c = A.coeff(al, lb)
                if not c.is_zero():
                    acc = acc + c * V3[b, j]
            V[3 + k, j] = acc
        for j in range(3):
            V[3 + k, 3 + j] = VS[k, j]
    labels = SPACETIME_LABELS + SPHERE_LABELS
    cf = Coframe(ch, V, ETA3 + (1, 1, 1), labels, labels, "E")
    return KKGeometry(spacetime, sphere, A, ch, cf)


def sample_regular(cf: Coframe, n: int, seed: int, tol: float = 1e-10, attempts: int = 5) -> Points:
    """Seeded sample points at which the vielbein is invertible.

    Singular points are replaced by fresh draws (logged); persistent failure raises.
    """
    pts = cf.chart.sample(n, seed)
    for k in range(attempts):
        try:
            cf.matrices(pts, tol=tol)
            return pts
        except SingularFrameError as exc:
            log.warning("resampling: %s", exc)
            det = np.abs(np.linalg.det(evaluate_array(cf.vielbein, pts)))
            fresh = cf.chart.sample(n, seed + 7919 * (k + 1))
            keep = det > tol
            pts = Points({c: np.where(keep, pts[c], fresh[c]) for c in cf.chart.coords})
    cf.matrices(pts, tol=tol)
    return pts


# ---------------------------------------------------------------------------
# connection
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConnectionForms:
    """Numeric connection 1-forms in the coframe basis, ``Omega_{AB} = -Omega_{BA}``."""

    coframe: Coframe
    points: Points
    upper: dict  # (A, B) with pos(A) < pos(B) -> Form
    dE: dict  # A -> numeric 2-form dE_A in the coframe basis

    def __call__(self, A, B) -> Form:
        if A == B:
            return Form.zero(self.coframe.chart, 1, (), self.coframe.name, self.points.n)
        if (A, B) in self.upper:
            return self.upper[(A, B)]
        return -self.upper[(B, A)]

    def component(self, A, B, C) -> np.ndarray:
        """``iota`` of ``Omega_{AB}`` on the basis: coefficient of ``E_C``."""
        f = self(A, B)
        return f.components.get((self.coframe.pos(C),), np.zeros(self.points.n, complex))

    def value_on(self, A, B, C) -> np.ndarray:
        """``Omega_{AB}(X_C) = eta_CC * coefficient of E_C``."""
        return self.component(A, B, C) * self.coframe.eta(C)


def frame_derivatives(cf: Coframe, points: Points, cache=None) -> dict:
    """``dE_A`` expressed in the coframe basis at the sample points."""
    return {A: change_frame(d(cf.form(A)), cf, points, "frame", cache) for A in cf.labels}


def solve_levi_civita(cf: Coframe, points: Points, cache=None) -> ConnectionForms:
    """Torsion-free connection from
    ``Omega_AB = 1/2 [-iota_A dE_B + iota_B dE_A + iota_A iota_B (dE_C) E^C]``."""
    cache = {} if cache is None else cache
    cf.matrices(points, cache)
    dE = frame_derivatives(cf, points, cache)
    X = {A: cf.frame_vector(A) for A in cf.labels}
    upper = {}
    labels = cf.labels
    for i, A in enumerate(labels):
        for B in labels[i + 1:]:
            om = interior(X[B], dE[A]) - interior(X[A], dE[B])
            for C in labels:
                s = interior(X[A], interior(X[B], dE[C]))
                if s.components:
                    om = om + wedge(s, cf.basis_form(C).evaluate(points)) * cf.eta(C)
            upper[(A, B)] = om * 0.5
    return ConnectionForms(cf, points, upper, dE)


def structure_residual(conn: ConnectionForms) -> dict:
    """``dE_A + Omega_A^B ^ E_B`` per label (numeric 2-forms)."""
    cf = conn.coframe
    pts = conn.points
    out = {}
    for A in cf.labels:
        r = conn.dE[A]
        for B in cf.labels:
            if B == A:
                continue
            r = r + wedge(conn(A, B), cf.basis_form(B).evaluate(pts)) * cf.eta(B)
        out[A] = r
    return out


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurvatureForms:
    spacetime: SpacetimeModel
    forms: dict  # alpha -> symbolic coordinate 2-form
    quadratic: Fraction

    def frame_components(self, points: Points, cache=None) -> dict:
        """``F_alpha^{bc}`` (coefficient of ``e_b ^ e_c``) as (N,) arrays keyed (alpha, b, c)."""
        cf = self.spacetime.coframe
        out = {}
        for al, F in self.forms.items():
            Ff = change_frame(F, cf, points, "frame", cache)
            for b in SPACETIME_LABELS:
                for c in SPACETIME_LABELS:
                    out[(al, b, c)] = Ff.component((cf.pos(b), cf.pos(c)))
        return out


def curvature(A: GaugePotential, spacetime: SpacetimeModel, quadratic=Fraction(1, 2)) -> CurvatureForms:
    """``F_alpha = dA_alpha + q eps_alpha^{beta gamma} A_beta ^ A_gamma`` (q = 1/2 by default)."""
    forms = {al: A.form(al, spacetime) for al in SPHERE_LABELS}
    out = {}
    for al in SPHERE_LABELS:
        F = d(forms[al])
        for be in SPHERE_LABELS:
            for ga in SPHERE_LABELS:
                s = eps3(al, be, ga)
                if s:
                    F = F + wedge(forms[be], forms[ga]) * const(Fraction(quadratic) * s)
        out[al] = F
    return CurvatureForms(spacetime, out, Fraction(quadratic))


def bianchi_check(A: GaugePotential, spacetime: SpacetimeModel, points: Points) -> list[Check]:
    """``dF_alpha + eps_alpha^{beta gamma} A_beta ^ F_gamma = 0``."""
    curv = curvature(A, spacetime)
    forms = {al: A.form(al, spacetime) for al in SPHERE_LABELS}
    out = []
    for al in SPHERE_LABELS:
        r = d(curv.forms[al])
        for be in SPHERE_LABELS:
            for ga in SPHERE_LABELS:
                s = eps3(al, be, ga)
                if s:
                    r = r + wedge(forms[be], curv.forms[ga]) * s
        exact = r.is_zero()
        rv = r.evaluate(points).per_point_max() if r.components else np.zeros(points.n)
        c = residual_check(f"Bianchi dF_{al} + eps A^F", rv, 1e-9, tag="F")
        c.detail["exact_zero"] = exact
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# decomposition identities
# ---------------------------------------------------------------------------


def _lift_spacetime_vector(geom: KKGeometry, X: FrameVector) -> FrameVector:
    n = X.n
    return FrameVector(geom.chart, tuple(X.components) + tuple(np.zeros(n, complex) for _ in range(3)), "coord", n)


def _lift_sphere_vector(geom: KKGeometry, X: FrameVector) -> FrameVector:
    n = X.n
    return FrameVector(geom.chart, tuple(np.zeros(n, complex) for _ in range(3)) + tuple(X.components), "coord", n)


def _potential_values(geom: KKGeometry, points: Points, cache=None) -> dict:
    """Numeric ``A_alpha^a`` keyed (alpha, a)."""
    return {
        (al, a): geom.potential.coeff(al, a)._eval(points, cache if cache is not None else {}) * np.ones(points.n)
        for al in SPHERE_LABELS
        for a in SPACETIME_LABELS
    }


def sphere_basis_in_bundle(geom: KKGeometry, Av: dict, points: Points) -> dict:
    """``e_alpha = E_alpha - A_alpha^a E_a`` as numeric 1-forms in the bundle frame."""
    cf = geom.coframe
    out = {}
    for al in SPHERE_LABELS:
        comps = {(cf.pos(al),): np.ones(points.n, complex)}
        for a in SPACETIME_LABELS:
            comps[(cf.pos(a),)] = -Av[(al, a)]
        out[al] = Form(geom.chart, 1, comps, (), cf.name, points.n)
    return out


def lift_form(geom: KKGeometry, f: Form, which: str, basis: dict, points: Points) -> Form:
    """Rewrite a numeric frame-basis form of one factor in the bundle frame.

    ``basis`` maps the factor's frame labels to numeric bundle-frame 1-forms.
    Factor sample values are taken from the same product points.
    """
    cf_f = geom.spacetime.coframe if which == "spacetime" else geom.sphere.coframe
    n = points.n
    out = None
    for idx, blk in f.components.items():
        term = Form(geom.chart, 0, {(): np.ones(n, complex)}, (), geom.coframe.name, n)
        for i in idx:
            term = wedge(term, basis[cf_f.labels[i]])
        if f.shape == ():
            term = term.scale(blk)
        else:
            raise ValueError("lift_form handles scalar forms only")
        out = term if out is None else out + term
    if out is None:
        return Form.zero(geom.chart, f.degree, f.shape, geom.coframe.name, n)
    return out


def verify_interior_decomposition(geom: KKGeometry, points: Points, n_random: int = 10, seed: int = 0, tol: float = 1e-10) -> list[Check]:
    """``iota_{XX_a} = iota_{X_a} - A^alpha_a iota_{X_alpha}`` and ``iota_{XX_alpha} = iota_{X_alpha}``."""
    cache = {}
    big = geom.coframe.coordinate_vectors(points, cache)
    st = geom.spacetime.coframe.coordinate_vectors(points, cache)
    sp = geom.sphere.coframe.coordinate_vectors(points, cache)
    Av = _potential_values(geom, points, cache)
    n = points.n
    rhs = {}
    for a in SPACETIME_LABELS:
        comps = list(_lift_spacetime_vector(geom, st[a]).components)
        for al in SPHERE_LABELS:
            low = Av[(al, a)] * ETA3[SPACETIME_LABELS.index(a)]
            liftal = _lift_sphere_vector(geom, sp[al]).components
            comps = [c - low * s for c, s in zip(comps, liftal)]
        rhs[a] = FrameVector(geom.chart, tuple(comps), "coord", n)
    for al in SPHERE_LABELS:
        rhs[al] = _lift_sphere_vector(geom, sp[al])
    tests = [geom.coframe.form(B).evaluate(points, cache) for B in geom.labels]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        comps = {I: rng.normal(size=n) + 1j * rng.normal(size=n) for I in itertools.combinations(range(6), 2)}
        tests.append(Form(geom.chart, 2, comps, (), "coord", n))
    out = []
    for A in geom.labels:
        res = np.zeros(n)
        for t in tests:
            diff = interior(big[A], t) - interior(rhs[A], t)
            if diff.degree == 0:
                v = diff.components.get((), np.zeros(n))
                res = np.maximum(res, np.abs(v))
            else:
                res = np.maximum(res, diff.per_point_max())
        name = f"iota_XX{A} = iota_X{A} - A^alpha_{A} iota_Xalpha" if A in SPACETIME_LABELS else f"iota_XX{A} = iota_X{A}"
        out.append(residual_check(name, res, tol, tag="e2"))
    return out


def verify_connection_decomposition(geom: KKGeometry, conn: ConnectionForms, tol: float = 1e-9) -> list[Check]:
    """Compare the bundle connection with

    ``Omega_ab = omega_ab - 1/2 F^gamma_ab (e_gamma + A_gamma)``,
    ``Omega_a beta = -1/2 F_beta a^b e_b``,
    ``Omega_alpha beta = omega_alpha beta - lambda eps A_gamma = lambda eps (e_gamma - A_gamma)``.

    The last line is checked both with the measured lambda and with the
    printed coefficient 1/2.
    """
    points = conn.points
    cache = {}
    n = points.n
    cf = geom.coframe
    lam = geom.sphere.lam_exact if geom.sphere.lam_exact is not None else geom.sphere.lam
    lamf = float(lam)
    om3 = solve_levi_civita(geom.spacetime.coframe, points, cache)
    omS = solve_levi_civita(geom.sphere.coframe, points, cache)
    Av = _potential_values(geom, points, cache)
    Fc = curvature(geom.potential, geom.spacetime).frame_components(points, cache)
    ebasis = {a: cf.basis_form(a).evaluate(points) for a in SPACETIME_LABELS}
    sbasis = sphere_basis_in_bundle(geom, Av, points)
    eta = dict(zip(SPACETIME_LABELS, ETA3))

    def F_low(g, a, b):  # F_{gamma a b}
        return Fc[(g, a, b)] * eta[a] * eta[b]

    def A_form(g):
        f = Form.zero(geom.chart, 1, (), cf.name, n)
        for a in SPACETIME_LABELS:
            f = f + ebasis[a].scale(Av[(g, a)])
        return f

    out = []
    res = np.zeros(n)
    for a in SPACETIME_LABELS:
        for b in SPACETIME_LABELS:
            if a >= b:
                continue
            pred = lift_form(geom, om3(a, b), "spacetime", ebasis, points)
            for g in SPHERE_LABELS:
                pred = pred - (sbasis[g] + A_form(g)).scale(0.5 * F_low(g, a, b))
            res = np.maximum(res, (conn(a, b) - pred).per_point_max())
    out.append(residual_check("Omega_ab = omega_ab - 1/2 F^g_ab (e_g + A_g)", res, tol, tag="e4"))
    res = np.zeros(n)
    for a in SPACETIME_LABELS:
        for be in SPHERE_LABELS:
            pred = Form.zero(geom.chart, 1, (), cf.name, n)
            for b in SPACETIME_LABELS:
                # F_{beta a}^{b} = eta_aa F_beta^{ab}
                pred = pred - ebasis[b].scale(0.5 * Fc[(be, a, b)] * eta[a])
            res = np.maximum(res, (conn(a, be) - pred).per_point_max())
    out.append(residual_check("Omega_a beta = -1/2 F_beta a^b e_b", res, tol, tag="e4"))
    for label, coef in (("lambda", lamf), ("1/2", 0.5)):
        res_l = np.zeros(n)
        res_r = np.zeros(n)
        for al in SPHERE_LABELS:
            for be in SPHERE_LABELS:
                if al >= be:
                    continue
                wab = lift_form(geom, omS(al, be), "sphere", sbasis, points)
                left = wab
                right = Form.zero(geom.chart, 1, (), cf.name, n)
                for g in SPHERE_LABELS:
                    s = eps3(al, be, g)
                    if s:
                        left = left - A_form(g).scale(coef * s)
                        right = right + (sbasis[g] - A_form(g)).scale(coef * s)
                res_l = np.maximum(res_l, (conn(al, be) - left).per_point_max())
                res_r = np.maximum(res_r, (conn(al, be) - right).per_point_max())
        out.append(residual_check(f"Omega_ab(S3) = omega_ab - {label} eps A", res_l, tol, tag="e4", detail={"coefficient": coef}))
        out.append(residual_check(f"Omega_ab(S3) = {label} eps (e - A)", res_r, tol, tag="e4", detail={"coefficient": coef}))
    return out


def verify_hodge_decomposition(geom: KKGeometry, points: Points, tol: float = 1e-10, sphere_orientation=None) -> list[Check]:
    """``#E_a = *e_a ^ *1_S + *1 ^ A^g_a *e_g``, ``#E_alpha = -*1 ^ *e_alpha``, ``#1 = *1 ^ *1_S``.

    ``#`` is the bundle Hodge map, ``*`` the spacetime one and the sphere
    Hodge is taken with ``sphere_orientation`` (default: the declared one).
    """
    cache = {}
    n = points.n
    cf = geom.coframe
    st = geom.spacetime.coframe
    sc = geom.sphere.coframe
    if sphere_orientation is not None:
        sc = Coframe(sc.chart, sc.vielbein, sc.signature, sc.labels, tuple(sphere_orientation), sc.name)
    Av = _potential_values(geom, points, cache)
    ebasis = {a: cf.basis_form(a).evaluate(points) for a in SPACETIME_LABELS}
    sbasis = sphere_basis_in_bundle(geom, Av, points)
    one3 = Form(st.chart, 0, {(): np.ones(n, complex)}, (), st.name, n)
    oneS = Form(sc.chart, 0, {(): np.ones(n, complex)}, (), sc.name, n)
    star1 = lift_form(geom, hodge(one3, st), "spacetime", ebasis, points)
    sstar1 = lift_form(geom, hodge(oneS, sc), "sphere", sbasis, points)
    one6 = Form(cf.chart, 0, {(): np.ones(n, complex)}, (), cf.name, n)
    out = []
    res = np.zeros(n)
    for a in SPACETIME_LABELS:
        lhs = hodge(cf.basis_form(a).evaluate(points), cf)
        ea = Form(st.chart, 1, {(st.pos(a),): np.ones(n, complex)}, (), st.name, n)
        rhs = wedge(lift_form(geom, hodge(ea, st), "spacetime", ebasis, points), sstar1)
        for g in SPHERE_LABELS:
            eg = Form(sc.chart, 1, {(sc.pos(g),): np.ones(n, complex)}, (), sc.name, n)
            low = Av[(g, a)] * ETA3[SPACETIME_LABELS.index(a)]
            rhs = rhs + wedge(star1, lift_form(geom, hodge(eg, sc), "sphere", sbasis, points)).scale(low)
        res = np.maximum(res, (lhs - rhs).per_point_max())
    out.append(residual_check("#E_a = *e_a ^ *1_S + *1 ^ A^g_a *e_g", res, tol, tag="e5"))
    res = np.zeros(n)
    for al in SPHERE_LABELS:
        lhs = hodge(cf.basis_form(al).evaluate(points), cf)
        eal = Form(sc.chart, 1, {(sc.pos(al),): np.ones(n, complex)}, (), sc.name, n)
        rhs = -wedge(star1, lift_form(geom, hodge(eal, sc), "sphere", sbasis, points))
        res = np.maximum(res, (lhs - rhs).per_point_max())
    out.append(residual_check("#E_alpha = -*1 ^ *e_alpha", res, tol, tag="e5"))
    res = (hodge(one6, cf) - wedge(star1, sstar1)).per_point_max()
    out.append(residual_check("#1 = *1 ^ *1_S", res, tol, tag="e5"))
    return out


def verify_geometry(geom: KKGeometry, n: int = 30, seed: int = 0, tolerances: dict | None = None) -> tuple[list[Check], dict]:
    """Every geometric identity of the bundle at ``n`` seeded points.

    Returns the checks and a summary (lambda, point count, conventions).
    """
    tol = {"structure": 1e-9, "interior": 1e-10, "connection": 1e-9, "hodge": 1e-10, "lambda": 1e-10}
    tol.update(tolerances or {})
    pts = geom.sample(n, seed)
    sp = geom.sphere
    checks = [
        Check(
            "Cartan-Maurer lambda consistent over e5, e6, e7",
            sp.lam_spread < tol["lambda"],
            "CM",
            "numeric",
            sp.lam_spread,
            sp.lam_spread,
            tol["lambda"],
            None,
            {"lambda": sp.lam, "components": list(sp.lam_components)},
        ),
        Check.exact("Cartan-Maurer de = lambda eps e^e holds exactly", sp.lam_exact is not None, "CM", {"lambda": str(sp.lam_exact)}),
    ]
    for label, cf in (("spacetime", geom.spacetime.coframe), ("sphere", sp.coframe), ("bundle", geom.coframe)):
        conn = solve_levi_civita(cf, pts)
        res = structure_residual(conn)
        worst = np.max([r.per_point_max() if r.components else np.zeros(n) for r in res.values()], axis=0)
        checks.append(residual_check(f"structure equation ({label})", worst, tol["structure"], tag="e3"))
        if label == "bundle":
            checks.extend(verify_connection_decomposition(geom, conn, tol["connection"]))
    checks.extend(verify_interior_decomposition(geom, pts, tol=tol["interior"]))
    checks.extend(verify_hodge_decomposition(geom, pts, tol=tol["hodge"]))
    checks.extend(bianchi_check(geom.potential, geom.spacetime, pts))
    info = {
        "lambda": {"measured": sp.lam, "exact": None if sp.lam_exact is None else str(sp.lam_exact), "components": list(sp.lam_components)},
        "points": n,
        "seed": seed,
        "invariance": sp.invariance,
    }
    return checks, info
