"""Dirac operators on M^{1+2}, S^3 and the bundle M^{1+5}, and the reduced equations.

All Dirac operators share one construction, ``(Gamma^A *E_A) ^ D`` with
``D = d + 1/2 Omega_AB Sigma^AB``, applied to a spinor column and read off as
the coefficient of the oriented volume form of its coframe.  The reduced
system is built from the factor geometries only and compared with the
six-dimensional operator at sample points.

Top-degree forms are compared in the single volume basis
``e0 ^ e1 ^ e2 ^ e5 ^ e6 ^ e7``: a factor ``*1 ^ {...}`` contributes with sign
``+1`` and ``star1_S ^ {...}`` with sign ``-1`` (two odd forms commuted).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .clifford import (
    GammaRep,
    SU2Element,
    build_gamma_0_3,
    build_gamma_1_2,
    eye,
    lift_to_6d,
    lorentz_generators,
    su2_euler,
    to_complex,
)
from .exterior import Coframe, Form, change_frame, d, hodge, wedge
from .geometry import (
    ETA3,
    SPACETIME_LABELS,
    SPHERE_LABELS,
    ConnectionForms,
    KKGeometry,
    _potential_values,
    curvature,
    eps3,
    solve_levi_civita,
)
from .qi import QI
from .report import Check, residual_check
from .symexpr import Chart, Expr, Points, const, evaluate_array

__all__ = [
    "SpinorField3",
    "AnsatzSpinor6",
    "Term",
    "ReducedSystem",
    "MassMatrix",
    "EigenResult",
    "NonEigenstateError",
    "random_spinor3",
    "random_ansatz",
    "build_ansatz",
    "covariant_derivative",
    "dirac_top",
    "dirac_3d",
    "dirac_s3",
    "dirac_6d",
    "reduce_equations",
    "specialize_eigenstate",
    "free_limit_check",
    "mass_spectrum",
    "derived_mass_matrix",
    "Isodoublet",
    "minimal_coupling_operator",
    "gauge_transform",
    "gauge_covariance_check",
    "random_gauge_element",
    "connection_term_eigenvalue",
    "run_reduction",
]


class NonEigenstateError(ValueError):
    """The S^3 spinor is not an eigenstate of the S^3 Dirac operator."""


# ---------------------------------------------------------------------------
# spinors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpinorField3:
    chart: Chart
    label: tuple
    components: tuple  # two Expr

    def column(self) -> np.ndarray:
        return np.array(self.components, dtype=object)


def _random_poly(chart, rng, degree, max_num=4, max_den=3):
    xs = chart.symbols()
    out = Expr()
    for deg in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(len(xs)), deg):
            m = Expr.one()
            for i in combo:
                m = m * xs[i]
            re = Fraction(int(rng.integers(-max_num, max_num + 1)), int(rng.integers(1, max_den + 1)))
            im = Fraction(int(rng.integers(-max_num, max_num + 1)), int(rng.integers(1, max_den + 1)))
            if re or im:
                out = out + m * const(QI(re, im))
    return out


def random_spinor3(chart: Chart, seed: int, label=(1, 1), degree: int = 2) -> SpinorField3:
    """Seeded two-component spinor of degree <= ``degree`` with Gaussian-rational coefficients."""
    rng = np.random.default_rng(seed)
    return SpinorField3(chart, tuple(label), (_random_poly(chart, rng, degree), _random_poly(chart, rng, degree)))


@dataclass(frozen=True, eq=False)
class AnsatzSpinor6:
    """``Psi = eta^i (x) G xi^j (x) psi_ij`` as an 8-component column on the product chart."""

    psi: dict  # (i, j) -> SpinorField3
    G: SU2Element
    chart: Chart
    column: np.ndarray = field(repr=False)

    def sphere_spinor(self, j: int) -> np.ndarray:
        """``G xi^j``: the j-th column of G."""
        return self.G.matrix[:, j - 1].copy()


def build_ansatz(geom: KKGeometry, psi: dict, G: SU2Element | None = None) -> AnsatzSpinor6:
    if set(psi) != {(1, 1), (1, 2), (2, 1), (2, 2)}:
        raise ValueError("need psi_ij for i, j in {1, 2}")
    G = G or geom.sphere.G
    col = np.empty(8, dtype=object)
    for i in (1, 2):
        for k in range(2):
            for l in range(2):
                acc = Expr()
                for j in (1, 2):
                    acc = acc + G.matrix[k, j - 1] * psi[(i, j)].components[l]
                col[(i - 1) * 4 + k * 2 + l] = acc
    return AnsatzSpinor6(dict(psi), G, geom.chart, col)


def random_ansatz(geom: KKGeometry, seed: int, degree: int = 2) -> AnsatzSpinor6:
    ch = geom.spacetime.chart
    psi = {(i, j): random_spinor3(ch, seed * 16 + 4 * i + j, (i, j), degree) for i in (1, 2) for j in (1, 2)}
    return build_ansatz(geom, psi)


# ---------------------------------------------------------------------------
# Dirac operators
# ---------------------------------------------------------------------------


def covariant_derivative(column, cf: Coframe, conn: ConnectionForms, rep: GammaRep, points: Points, cache=None) -> Form:
    """``D s = d s + 1/2 Omega_AB Sigma^AB s`` as a numeric frame-basis 1-form."""
    cache = {} if cache is None else cache
    col = np.asarray(column, dtype=object)
    dim = col.shape[0]
    s0 = Form(cf.chart, 0, {(): col}, (dim,))
    out = change_frame(d(s0), cf, points, "frame", cache)
    s_num = evaluate_array(col, points, cache)
    sig = lorentz_generators(rep)
    for (A, B) in sig.pairs():
        om = conn(A, B)
        if not om.components:
            continue
        v = np.einsum("ij,nj->ni", to_complex(sig(A, B)), s_num)
        out = out + wedge(om, Form(cf.chart, 0, {(): v}, (dim,), cf.name, points.n))
    return out


def _gamma_form(cf: Coframe, rep: GammaRep, n: int) -> Form:
    comps = {(cf.pos(A),): to_complex(rep[A]) for A in cf.labels}
    return Form(cf.chart, 1, comps, (rep.dim, rep.dim), cf.name, n)


def volume_sign(cf: Coframe) -> int:
    """``vol = sign * E_0 ^ ... ^ E_{n-1}`` (positions in ascending order)."""
    from .clifford import levi_civita

    return levi_civita(*[cf.pos(l) for l in cf.orientation])


def dirac_top(Dpsi: Form, cf: Coframe, rep: GammaRep, gamma_coeffs: dict | None = None) -> np.ndarray:
    """Coefficient of the oriented volume in ``(Gamma^A *E_A) ^ Dpsi``.

    ``gamma_coeffs`` optionally replaces the frame 1-form ``E_A`` under the
    Hodge star by ``sum_B c[A][B] E_B`` (used for ``A^g_a star e_g``).
    """
    n = Dpsi.n
    G = _gamma_form(cf, rep, n)
    top = wedge(hodge(G, cf), Dpsi)
    key = tuple(range(cf.dim))
    v = top.components.get(key, np.zeros((n, Dpsi.shape[0]), complex))
    return v * volume_sign(cf)


@dataclass(frozen=True, eq=False)
class _Factors:
    """Numeric data of the factor geometries at one set of product points."""

    points: Points
    conn3: ConnectionForms
    connS: ConnectionForms
    g3: GammaRep
    gS: GammaRep
    A: dict  # (alpha, a) -> (N,) coefficients A_alpha^a
    F: dict  # (alpha, b, c) -> (N,) coefficients F_alpha^{bc}
    cache: dict


def _factors(geom: KKGeometry, points: Points) -> _Factors:
    cache = {}
    conn3 = solve_levi_civita(geom.spacetime.coframe, points, cache)
    connS = solve_levi_civita(geom.sphere.coframe, points, cache)
    A = _potential_values(geom, points, cache)
    F = curvature(geom.potential, geom.spacetime).frame_components(points, cache)
    return _Factors(points, conn3, connS, build_gamma_1_2(), build_gamma_0_3(), A, F, cache)


def dirac_3d(psi: SpinorField3, geom: KKGeometry, points: Points, fac: _Factors | None = None) -> np.ndarray:
    """``(gamma^c *e_c) ^ (d + 1/2 omega_ab sigma^ab) psi`` as the coefficient of ``*1``, shape (N, 2)."""
    fac = fac or _factors(geom, points)
    cf = geom.spacetime.coframe
    D = covariant_derivative(psi.column(), cf, fac.conn3, fac.g3, points, fac.cache)
    return dirac_top(D, cf, fac.g3)


@dataclass(frozen=True)
class EigenResult:
    m: complex
    m_exact: QI | None
    spread: float
    residual: float
    per_point: np.ndarray = field(repr=False, compare=False)
    is_eigenstate: bool = True
    zero_mode: bool = False


def _recognize(z: complex, den: int = 64, tol: float = 1e-9) -> QI | None:
    re = Fraction(z.real).limit_denominator(den)
    im = Fraction(z.imag).limit_denominator(den)
    if abs(float(re) - z.real) < tol and abs(float(im) - z.imag) < tol:
        return QI(re, im)
    return None


def _sphere_dirac_values(spinor, geom, points, fac):
    cf = geom.sphere.coframe
    D = covariant_derivative(spinor, cf, fac.connS, fac.gS, points, fac.cache)
    return dirac_top(D, cf, fac.gS), D


def dirac_s3(spinor, geom: KKGeometry, points: Points, fac: _Factors | None = None, tol: float = 1e-9) -> EigenResult:
    """Apply the S^3 Dirac operator to a 2-component column and test for ``m spinor star1``."""
    fac = fac or _factors(geom, points)
    top, _ = _sphere_dirac_values(np.asarray(spinor, dtype=object), geom, points, fac)
    s = evaluate_array(np.asarray(spinor, dtype=object), points, fac.cache)
    ratio = np.einsum("ni,ni->n", s.conj(), top) / np.einsum("ni,ni->n", s.conj(), s)
    m = complex(np.mean(ratio))
    spread = float(np.max(np.abs(ratio - m)))
    resid = float(np.max(np.abs(top - m * s)))
    ok = spread < tol and resid < tol
    exact = _recognize(m) if ok else None
    return EigenResult(m, exact, spread, resid, ratio, ok, ok and abs(m) < tol)


def connection_term_eigenvalue(lam) -> QI:
    """Exact ``1/2 lambda eps_abg gamma^g sigma^ab`` for the constant spinor (a multiple of 1)."""
    gS = build_gamma_0_3()
    sig = lorentz_generators(gS)
    lam = Fraction(lam)
    acc = None
    for a, b, g in itertools.permutations(SPHERE_LABELS, 3):
        term = gS[g] @ sig(a, b) * (eps3(a, b, g) * QI(lam) / 2)
        acc = term if acc is None else acc + term
    if acc[0, 1] or acc[1, 0] or acc[0, 0] != acc[1, 1]:
        raise ArithmeticError("connection term is not proportional to the identity")
    return acc[0, 0]


def dirac_6d(ansatz: AnsatzSpinor6, geom: KKGeometry, M, points: Points, conn: ConnectionForms | None = None, cache=None):
    """``#Gamma ^ D Psi - M #Psi`` as the coefficient of the oriented volume, shape (N, 8)."""
    cache = {} if cache is None else cache
    cf = geom.coframe
    conn = conn or solve_levi_civita(cf, points, cache)
    g6 = lift_to_6d(build_gamma_1_2(), build_gamma_0_3())
    D = covariant_derivative(ansatz.column, cf, conn, g6, points, cache)
    lhs = dirac_top(D, cf, g6)
    psi = evaluate_array(ansatz.column, points, cache)
    return lhs - complex(M) * psi


# ---------------------------------------------------------------------------
# reduced system
# ---------------------------------------------------------------------------

SIGMA_ACTION = {
    # sigma_k eta^i = c eta^t  ->  (k, i): (t, c)
    (1, 1): (2, QI(1)),
    (1, 2): (1, QI(1)),
    (2, 1): (2, QI(0, 1)),
    (2, 2): (1, QI(0, -1)),
}

_MASTER = (
    # tag, sigma, order, prefactor: the braces of the six-dimensional equation
    ("dirac_M3", 1, "S^M", QI(1)),
    ("minimal", 1, "S^M", QI(-1) / 4),
    ("curvature", 2, "S^M", QI(1) / 4),
    ("A_dirac_S3", 1, "M^S", QI(1)),
    ("dirac_S3", 2, "M^S", QI(-1)),
)

ORDER_SIGN = {"M^S": 1, "S^M": -1}


@dataclass
class Term:
    tag: str
    order: str  # "M^S" for *1 ^ {...}, "S^M" for star1_S ^ {...}
    coefficient: QI  # multiplies the basic operator value below
    source: int  # first index i of psi_ij feeding the term
    value: np.ndarray = field(default=None, repr=False)  # (N, 4) contribution to the volume coefficient

    def as_dict(self):
        return {"tag": self.tag, "order": self.order, "coefficient": str(self.coefficient), "source": f"psi_{self.source}j"}


@dataclass
class ReducedSystem:
    """Two coupled equations (components along eta^1 and eta^2)."""

    equations: dict  # target t -> list[Term]
    mass: object
    rhs: dict  # t -> (N, 4) value of the mass term M G xi^j (x) psi_tj
    specialized: bool = False
    m: object = None
    free_limit: bool = False
    points: Points = field(default=None, repr=False)

    def lhs(self, t: int, signs: dict | None = None) -> np.ndarray:
        signs = signs or ORDER_SIGN
        out = 0
        for term in self.equations[t]:
            out = out + signs[term.order] * term.value
        return out

    def residual(self, t: int, signs: dict | None = None) -> np.ndarray:
        return self.lhs(t, signs) - self.rhs[t]

    def tags(self, t: int):
        return [(term.tag, term.source) for term in self.equations[t]]

    def as_dict(self):
        return {
            "specialized": self.specialized,
            "free_limit": self.free_limit,
            "m": None if self.m is None else str(self.m),
            "equations": {f"eta{t}": [term.as_dict() for term in terms] for t, terms in self.equations.items()},
        }


def _kron2(a, b):
    return np.einsum("nk,nl->nkl", a, b).reshape(a.shape[0], 4)


def _basic_values(ansatz: AnsatzSpinor6, geom: KKGeometry, fac: _Factors) -> dict:
    """Operator values per (tag, i, j) before prefactors and sigma bookkeeping.

    Every value is the coefficient of the relevant factor volume (*1 or star1_S)
    in the brace, as a (N, 4) array in the G xi (x) psi product space.
    """
    pts = fac.points
    n = pts.n
    cache = fac.cache
    cfS = geom.sphere.coframe
    g3, gS = fac.g3, fac.gS
    sig3 = lorentz_generators(g3)
    sigS = lorentz_generators(gS)
    eta = dict(zip(SPACETIME_LABELS, ETA3))
    gam3 = {a: to_complex(g3[a]) for a in SPACETIME_LABELS}
    gamS = {al: to_complex(gS[al]) for al in SPHERE_LABELS}
    out = {}
    for j in (1, 2):
        col = ansatz.sphere_spinor(j)
        Gx = evaluate_array(col, pts, cache)
        DS_top, DG = _sphere_dirac_values(col, geom, pts, fac)
        # (star e_g) ^ D(G xi): coefficient of star1_S for each g
        star_e = {}
        for g in SPHERE_LABELS:
            eg = Form(cfS.chart, 1, {(cfS.pos(g),): np.ones(n, complex)}, (), cfS.name, n)
            w = wedge(hodge(eg, cfS), DG)
            star_e[g] = w.components.get((0, 1, 2), np.zeros((n, 2), complex)) * volume_sign(cfS)
        # -1/4 eps sigma^{ab} acting on G xi, per gamma
        for i in (1, 2):
            psi = ansatz.psi[(i, j)]
            pv = evaluate_array(psi.column(), pts, cache)
            DM = dirac_3d(psi, geom, pts, fac)
            out[("dirac_M3", i, j)] = _kron2(Gx, DM)
            out[("dirac_S3", i, j)] = _kron2(DS_top, pv)
            # minimal: (-1/4 eps_abg sigma^ab) G xi (x) (A_{g a} gamma^a) psi  [prefactor -1/4 applied later]
            acc = np.zeros((n, 4), complex)
            for g in SPHERE_LABELS:
                M2 = np.zeros((2, 2), complex)
                for a_, b_ in itertools.permutations(SPHERE_LABELS, 2):
                    e = eps3(a_, b_, g)
                    if e:
                        M2 = M2 + e * to_complex(sigS(a_, b_))
                left = np.einsum("ij,nj->ni", M2, Gx)
                for a in SPACETIME_LABELS:
                    low = fac.A[(g, a)] * eta[a]
                    right = np.einsum("ij,nj->ni", gam3[a], pv) * low[:, None]
                    acc = acc + _kron2(left, right)
            out[("minimal", i, j)] = acc
            # curvature: gamma^alpha G xi (x) (F_{alpha a b} sigma^ab) psi  [prefactor 1/4]
            acc = np.zeros((n, 4), complex)
            for al in SPHERE_LABELS:
                left = np.einsum("ij,nj->ni", gamS[al], Gx)
                right = np.zeros((n, 2), complex)
                for a, b in itertools.permutations(SPACETIME_LABELS, 2):
                    Flow = fac.F[(al, a, b)] * eta[a] * eta[b]
                    right = right + np.einsum("ij,nj->ni", to_complex(sig3(a, b)), pv) * Flow[:, None]
                acc = acc + _kron2(left, right)
            out[("curvature", i, j)] = acc
            # A term: [(A^g_a star e_g) ^ D] G xi (x) gamma^a psi
            acc = np.zeros((n, 4), complex)
            for a in SPACETIME_LABELS:
                left = np.zeros((n, 2), complex)
                for g in SPHERE_LABELS:
                    left = left + star_e[g] * (fac.A[(g, a)] * eta[a])[:, None]
                right = np.einsum("ij,nj->ni", gam3[a], pv)
                acc = acc + _kron2(left, right)
            out[("A_dirac_S3", i, j)] = acc
            out[("mass", i, j)] = _kron2(Gx, pv)
    return out


def _depends(tag, geom: KKGeometry, F_zero: bool) -> bool:
    if tag in ("minimal", "A_dirac_S3"):
        return not geom.potential.is_zero()
    if tag == "curvature":
        return not F_zero
    return True


def reduce_equations(ansatz: AnsatzSpinor6, geom: KKGeometry, M, points: Points, fac: _Factors | None = None) -> ReducedSystem:
    """Split the six-dimensional equation along ``eta^1`` and ``eta^2``.

    Terms that vanish identically (``A = 0`` or ``F = 0`` exactly) are
    dropped from the term lists; the flag ``free_limit`` marks ``A = F = 0``.
    """
    fac = fac or _factors(geom, points)
    vals = _basic_values(ansatz, geom, fac)
    F_zero = all(F.is_zero() for F in curvature(geom.potential, geom.spacetime).forms.values())
    equations = {1: [], 2: []}
    for tag, k, order, pref in _MASTER:
        if not _depends(tag, geom, F_zero):
            continue
        for i in (1, 2):
            t, c = SIGMA_ACTION[(k, i)]
            coef = pref * c
            val = sum(vals[(tag, i, j)] for j in (1, 2)) * complex(coef)
            equations[t].append(Term(tag, order, coef, i, val))
    rhs = {t: complex(M) * sum(vals[("mass", t, j)] for j in (1, 2)) for t in (1, 2)}
    free = geom.potential.is_zero() and F_zero
    return ReducedSystem(equations, M, rhs, False, None, free, points)


def specialize_eigenstate(sys: ReducedSystem, m, ansatz: AnsatzSpinor6, geom: KKGeometry, strict: bool = True, fac=None, tol=1e-9) -> ReducedSystem:
    """Replace the S^3 Dirac term by ``+-i m G xi^j (x) psi`` (coefficient of star1_S)."""
    pts = sys.points
    fac = fac or _factors(geom, pts)
    if strict:
        for j in (1, 2):
            r = dirac_s3(ansatz.sphere_spinor(j), geom, pts, fac, tol)
            if not r.is_eigenstate or abs(r.m - complex(m)) > tol:
                raise NonEigenstateError(f"G xi^{j} is not an S^3 eigenstate with eigenvalue {m} (spread {r.spread:.2e})")
    new = {}
    for t, terms in sys.equations.items():
        out = []
        for term in terms:
            if term.tag != "dirac_S3":
                out.append(term)
                continue
            val = 0
            for j in (1, 2):
                Gx = evaluate_array(ansatz.sphere_spinor(j), pts, fac.cache)
                pv = evaluate_array(ansatz.psi[(term.source, j)].column(), pts, fac.cache)
                val = val + _kron2(Gx, pv)
            coef = term.coefficient * m if isinstance(m, QI) else complex(term.coefficient) * complex(m)
            out.append(Term("eigen_mass", term.order, coef, term.source, val * complex(coef)))
        new[t] = out
    return replace(sys, equations=new, specialized=True, m=m)


# Printed structure of the free-limit equations, normalized so the Dirac term on
# M^{1+2} has coefficient +1 in the *1 reading:
#   eta^1:  (D_M - i m) psi_2j = M psi_1j ;   eta^2:  (D_M + i m) psi_1j = M psi_2j
FREE_LIMIT_PRINTED = {
    1: {"dirac_M3": (2, QI(1)), "eigen_mass": (2, QI(0, -1)), "mass": (1, QI(1))},
    2: {"dirac_M3": (1, QI(1)), "eigen_mass": (1, QI(0, 1)), "mass": (2, QI(1))},
}


def free_limit_check(sys: ReducedSystem) -> list[Check]:
    """Compare the specialized free-limit term structure with the printed one.

    The tag comparison is symbolic.  Coefficients are normalized so that the
    Dirac term on M^{1+2} carries +1 (after moving every term to the ``*1 ^
    star1_S`` reading) and reported separately: the ``i m`` coefficient as the
    multiple of ``m``, the mass coefficient as the multiple of ``M`` on the
    right-hand side.
    """
    if not sys.free_limit or not sys.specialized:
        raise ValueError("free_limit_check needs the specialized system of an A = 0 geometry")
    m = sys.m if isinstance(sys.m, QI) else None
    if m is None or not m:
        raise ValueError("free_limit_check needs an exact non-zero m")
    out = []
    for t in (1, 2):
        got = {term.tag: term for term in sys.equations[t]}
        exp = FREE_LIMIT_PRINTED[t]
        tags_ok = set(got) | {"mass"} == set(exp) and all(got[k].source == exp[k][0] for k in got)
        out.append(Check.exact(f"free-limit terms eta^{t}", tags_ok, tag="rde1me/rde2me", detail={"tags": sorted(got)}))
        if not tags_ok:
            continue
        dm, em = got["dirac_M3"], got["eigen_mass"]
        norm = dm.coefficient * ORDER_SIGN[dm.order]
        im_coef = em.coefficient * ORDER_SIGN[em.order] / norm / m
        mass_coef = QI(1) / norm
        detail = {
            "m_coefficient": str(im_coef),
            "m_coefficient_printed": str(exp["eigen_mass"][1]),
            "M_coefficient": str(mass_coef),
            "M_coefficient_printed": str(exp["mass"][1]),
        }
        out.append(Check.exact(f"free-limit i m coefficient eta^{t}", im_coef == exp["eigen_mass"][1], tag="rde1me/rde2me", detail=detail))
        out.append(Check.exact(f"free-limit M coefficient eta^{t}", mass_coef == exp["mass"][1], tag="rde1me/rde2me", detail=detail))
    return out


# ---------------------------------------------------------------------------
# mass matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassMatrix:
    M: QI
    m: QI
    matrix: tuple
    eigenvalues: tuple
    eigenvectors: tuple  # exact eigenvectors (v1, v2) for each eigenvalue
    hermitian: bool
    negative_branch: bool
    checks: tuple = ()

    def as_dict(self):
        return {
            "M": str(self.M),
            "m": str(self.m),
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "eigenvalues": [str(x) for x in self.eigenvalues],
            "eigenvectors": [[str(x) for x in v] for v in self.eigenvectors],
            "hermitian": self.hermitian,
            "negative_mass_branch": self.negative_branch,
            "checks": [c.as_dict() for c in self.checks],
        }


def _qi(x) -> QI:
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Fraction)):
        return QI(x)
    if isinstance(x, str):
        return QI.parse(x)
    raise TypeError("mass parameters must be exact (int, Fraction, QI or string)")


def mass_spectrum(M, m) -> MassMatrix:
    """The free-limit mass matrix ``[[M, i m], [-i m, M]]``, its exact spectrum and
    the printed eigenspinor combinations ``1/2 (psi_1 +- psi_2)`` tested against it."""
    M, m = _qi(M), _qi(m)
    i = QI(0, 1)
    mat = ((M, i * m), (-i * m, M))
    evals = (M + m, M - m)
    # exact eigenvectors: for M + m use (1, -i), for M - m use (1, i)
    evecs = ((QI(1), -i), (QI(1), i)) if m else ((QI(1), QI(0)), (QI(0), QI(1)))

    def act(v):
        return (mat[0][0] * v[0] + mat[0][1] * v[1], mat[1][0] * v[0] + mat[1][1] * v[1])

    checks = []
    for lam_, v in zip(evals, evecs):
        w = act(v)
        checks.append(Check.exact(f"eigenvector for {lam_}", w == (lam_ * v[0], lam_ * v[1]), tag="mass"))
    for sgn, lam_ in ((1, evals[0]), (-1, evals[1])):
        v = (QI(1) / 2, QI(sgn) / 2)
        w = act(v)
        ok = w == (lam_ * v[0], lam_ * v[1])
        checks.append(
            Check.exact(
                f"1/2(psi_1 {'+' if sgn > 0 else '-'} psi_2) has eigenvalue {lam_}",
                ok,
                tag="mass",
                detail={"image": [str(x) for x in w], "expected": [str(lam_ * x) for x in v]},
            )
        )
    herm = all(mat[r][c] == mat[c][r].conjugate() for r in range(2) for c in range(2))
    neg = m.is_real() and M.is_real() and m.re > M.re
    return MassMatrix(M, m, mat, evals, evecs, herm, neg, tuple(checks))


def derived_mass_matrix(M, m) -> dict:
    """Mass matrix implied by the reduced free-limit equations under graded wedge ordering.

    With ``star1_S ^ *1 = -vol`` the specialized equations read
    ``D_M psi_2 = i m psi_2 - M psi_1`` and ``D_M psi_1 = -i m psi_1 - M psi_2``,
    i.e. ``D_M (psi_1, psi_2) = K (psi_1, psi_2)`` with ``K = [[-i m, -M], [-M, i m]]``.
    Its eigenvalues square to ``M^2 - m^2``.
    """
    M, m = _qi(M), _qi(m)
    i = QI(0, 1)
    K = ((-i * m, -M), (-M, i * m))
    return {"matrix": [[str(x) for x in r] for r in K], "eigenvalue_squared": str(M * M - m * m)}


# ---------------------------------------------------------------------------
# minimally coupled isodoublet
# ---------------------------------------------------------------------------


def _mat_form_from_potential(geom: KKGeometry) -> Form:
    """``A = A_alpha gamma^alpha`` as a 2x2-valued coordinate 1-form on the spacetime chart."""
    st = geom.spacetime
    gS = build_gamma_0_3()
    out = Form.zero(st.chart, 1, (2, 2))
    for al in SPHERE_LABELS:
        Af = geom.potential.form(al, st)
        out = out + wedge(Af, Form(st.chart, 0, {(): np.vectorize(const, otypes=[object])(gS[al])}, (2, 2)))
    return out


def random_gauge_element(chart: Chart, seed: int, quadratic: bool = False) -> SU2Element:
    """``U(x) = G(theta(x), phi(x), psi(x))`` with seeded rational linear angles
    (plus a quadratic part when ``quadratic``)."""
    rng = np.random.default_rng(seed)
    xs = chart.symbols()

    def angle():
        e = const(Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))))
        for x in xs:
            e = e + x * const(Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))))
        if quadratic:
            e = e + xs[0] * xs[1] * const(Fraction(int(rng.integers(-3, 4)), 2))
        return e

    return su2_euler(angle(), angle(), angle())


def _values_and_derivs(mat, chart: Chart, points: Points, cache) -> tuple:
    """Values (N,)+shape and coordinate derivatives (dim, N)+shape of an Expr array."""
    mat = np.asarray(mat, dtype=object)
    vals = evaluate_array(mat, points, cache)
    der = np.empty((chart.dim,) + vals.shape, complex)
    for i, x in enumerate(chart.coords):
        dm = np.empty(mat.shape, dtype=object)
        for idx in np.ndindex(mat.shape):
            e = mat[idx]
            dm[idx] = e.diff(x) if isinstance(e, Expr) else Expr()
        der[i] = evaluate_array(dm, points, cache)
    return vals, der


@dataclass(frozen=True, eq=False)
class Isodoublet:
    """``Psi~ = U_1 ... U_k (G~ xi^i) (x) psi~_i``: isospin factors applied to a 2x2 (isospin, spinor) array.

    Kept factored so that derivatives follow from the product rule instead of
    expanding the full expression.
    """

    factors: tuple  # 2x2 Expr matrices, leftmost acts last
    psi: np.ndarray  # 2x2 Expr: psi[i, l] = component l of psi~_i

    @classmethod
    def from_fields(cls, Gt: SU2Element, psit: dict) -> "Isodoublet":
        P = np.empty((2, 2), dtype=object)
        for i in (1, 2):
            for l in range(2):
                P[i - 1, l] = psit[i].components[l]
        return cls((Gt.matrix,), P)

    def transformed(self, U: SU2Element) -> "Isodoublet":
        return Isodoublet((U.matrix,) + self.factors, self.psi)

    def column(self) -> np.ndarray:
        M = self.psi
        for f in reversed(self.factors):
            M = np.array([[sum((f[k, i] * M[i, l] for i in range(2)), Expr()) for l in range(2)] for k in range(2)], dtype=object)
        return M.reshape(4)

    def numeric(self, chart: Chart, points: Points, cache) -> tuple:
        """Values (N, 4) and coordinate derivatives (dim, N, 4)."""
        v, dv = _values_and_derivs(self.psi, chart, points, cache)
        for f in reversed(self.factors):
            fv, fd = _values_and_derivs(f, chart, points, cache)
            dv = np.einsum("dnki,nil->dnkl", fd, v) + np.einsum("nki,dnil->dnkl", fv, dv)
            v = np.einsum("nki,nil->nkl", fv, v)
        n = points.n
        return v.reshape(n, 4), dv.reshape(chart.dim, n, 4)


def minimal_coupling_operator(field_, Aform: Form, geom: KKGeometry, M, points: Points, cache=None):
    """Residual ``(gamma^c *e_c) ^ [(d + A) (x) 1 + 1 (x) (d + 1/2 omega sigma)] Psi~ - M Psi~ *1``.

    Returns the coefficient of ``*1`` with shape (N, 4) (isospin (x) spinor).
    ``field_`` is an :class:`Isodoublet`; ``Aform`` is a 2x2-valued
    coordinate 1-form, symbolic or numeric.
    """
    cache = {} if cache is None else cache
    st = geom.spacetime
    cf = st.coframe
    g3 = build_gamma_1_2()
    conn = solve_levi_civita(cf, points, cache)
    s_num, ds = field_.numeric(st.chart, points, cache)
    dcoord = Form(cf.chart, 1, {(i,): ds[i] for i in range(cf.dim)}, (4,), "coord", points.n)
    D = change_frame(dcoord, cf, points, "frame", cache)
    # A (x) 1 acting on the isospin slot
    Af = change_frame(Aform, cf, points, "frame", cache)
    for idx, blk in Af.components.items():
        big = np.einsum("nij,kl->nikjl", blk, np.eye(2)).reshape(points.n, 4, 4)
        v = np.einsum("nij,nj->ni", big, s_num)
        D = D + Form(cf.chart, 1, {idx: v}, (4,), cf.name, points.n)
    sig = lorentz_generators(g3)
    for (a, b) in sig.pairs():
        om = conn(a, b)
        if om.components:
            big = np.kron(np.eye(2), to_complex(sig(a, b)))
            v = np.einsum("ij,nj->ni", big, s_num)
            D = D + wedge(om, Form(cf.chart, 0, {(): v}, (4,), cf.name, points.n))
    rep4 = GammaRep(g3.signature, g3.labels, tuple(np.kron(eye(2), g3[a]) for a in g3.labels))
    top = dirac_top(D, cf, rep4)
    return top - complex(M) * s_num


def gauge_transform(Aform: Form, U: SU2Element, points: Points | None = None, cache=None) -> Form:
    """``A -> U A U^{-1} + U d(U^{-1})`` (the operator ``U (A + d) U^{-1}`` minus ``d``).

    Symbolic without ``points``; otherwise a numeric coordinate form.
    """
    ch = Aform.chart
    if points is None:
        Uf = Form(ch, 0, {(): U.matrix}, (2, 2))
        Uif = Form(ch, 0, {(): U.inverse()}, (2, 2))
        return wedge(wedge(Uf, Aform), Uif) + wedge(Uf, d(Uif))
    cache = {} if cache is None else cache
    Uv = evaluate_array(U.matrix, points, cache)
    Wv, Wd = _values_and_derivs(U.inverse(), ch, points, cache)
    An = Aform.evaluate(points, cache)
    comps = {}
    for i in range(ch.dim):
        blk = np.einsum("nij,njk->nik", Uv, Wd[i])
        if (i,) in An.components:
            blk = blk + np.einsum("nij,njk,nkl->nil", Uv, An.components[(i,)], Wv)
        comps[(i,)] = blk
    return Form(ch, 1, comps, (2, 2), "coord", points.n)


def gauge_covariance_check(U: SU2Element, psit: dict, Gt: SU2Element, geom: KKGeometry, M, points: Points, Aform: Form | None = None, tol=1e-9, name="") -> Check:
    """``R[U Psi~, A'] = (U (x) 1) R[Psi~, A]`` at the sample points."""
    Aform = _mat_form_from_potential(geom) if Aform is None else Aform
    cache = {}
    psi = Isodoublet.from_fields(Gt, psit)
    R = minimal_coupling_operator(psi, Aform, geom, M, points, cache)
    Ap = gauge_transform(Aform, U, points, cache)
    Rp = minimal_coupling_operator(psi.transformed(U), Ap, geom, M, points, cache)
    Uv = evaluate_array(U.matrix, points, cache)
    big = np.einsum("nij,kl->nikjl", Uv, np.eye(2)).reshape(points.n, 4, 4)
    diff = Rp - np.einsum("nij,nj->ni", big, R)
    scale = max(1.0, float(np.max(np.abs(R))))
    return residual_check(
        f"gauge covariance {name}".strip(),
        np.abs(diff).max(axis=1),
        tol,
        tag="nade",
        detail={"residual_scale": scale},
    )


# ---------------------------------------------------------------------------
# report driver
# ---------------------------------------------------------------------------


def _stats(arr) -> dict:
    r = np.abs(np.asarray(arr)).reshape(len(arr), -1).max(axis=1)
    return {"max": float(r.max()), "mean": float(r.mean())}


def run_reduction(geom: KKGeometry, M, *, m_mode: str = "extract", m=None, seeds=(7,), n: int = 30, tol: float = 1e-9, strict: bool = True, sweep: bool = True) -> dict:
    """Cross-validate the reduced system against the six-dimensional operator.

    Returns a dict with ``checks`` (gating :class:`Check` records),
    ``comparisons`` (printed-form comparisons, reported but not gating),
    ``instances`` (per-seed term tables), the spectrum and the warnings.
    """
    if m_mode not in ("extract", "explicit"):
        raise ValueError("m_mode must be 'extract' or 'explicit'")
    M = _qi(M)
    checks, comparisons, warnings, instances = [], [], [], []
    m0 = connection_term_eigenvalue(geom.sphere.lam_exact) if geom.sphere.lam_exact is not None else None
    extracted = None
    for k, seed in enumerate(seeds):
        pts = geom.sample(n, seed)
        fac = _factors(geom, pts)
        ans = random_ansatz(geom, seed)
        r6 = dirac_6d(ans, geom, M, pts, cache=fac.cache)
        sysr = reduce_equations(ans, geom, M, pts, fac)
        inst = {"seed": seed, "points": pts.n, "equations": {}}
        for t in (1, 2):
            res = sysr.residual(t) - r6[:, (t - 1) * 4:t * 4]
            checks.append(residual_check(f"reduction soundness eta^{t} seed {seed}", res, tol, tag="rde1/rde2"))
            inst["equations"][f"eta{t}"] = {
                "residual": _stats(res),
                "terms": [dict(term.as_dict(), **_stats(term.value)) for term in sysr.equations[t]],
                "mass": _stats(sysr.rhs[t]),
            }
        if sweep:
            table = {}
            for ms, sm in ((1, 1), (-1, -1), (-1, 1)):
                signs = {"M^S": ms, "S^M": sm}
                worst = max(float(np.abs(sysr.residual(t, signs) - r6[:, (t - 1) * 4:t * 4]).max()) for t in (1, 2))
                table[f"*1^{{..}}:{ms:+d},star1^{{..}}:{sm:+d}"] = worst
            inst["sign_sweep"] = table
        # S^3 eigenvalue from the left-translated spinors
        ev = [dirac_s3(ans.sphere_spinor(j), geom, pts, fac, tol) for j in (1, 2)]
        for j, r in zip((1, 2), ev):
            checks.append(Check(f"S^3 eigenstate G xi^{j} seed {seed}", r.is_eigenstate, "rde1b/rde2b", "numeric", r.spread, r.spread, tol, pts.n, {"m": [r.m.real, r.m.imag]}))
        if extracted is None and all(r.is_eigenstate for r in ev) and ev[0].m_exact is not None:
            extracted = ev[0].m_exact
        if k == 0:
            ms_ = extracted if m_mode == "extract" else _qi(m)
            if ms_ is None:
                raise NonEigenstateError("no constant S^3 eigenvalue could be extracted")
            sp = specialize_eigenstate(sysr, ms_, ans, geom, strict=strict, fac=fac, tol=tol)
            res = max(float(np.abs(sp.residual(t) - r6[:, (t - 1) * 4:t * 4]).max()) for t in (1, 2))
            c = residual_check("specialized system vs dirac_6d", np.array([res]), tol, tag="rde1b/rde2b", samples=pts.n)
            (checks if m_mode == "extract" or strict else comparisons).append(c)
            if sp.free_limit and ms_:
                comparisons.extend(free_limit_check(sp))
            inst["specialized_residual"] = res
        instances.append(inst)
    m_used = extracted if m_mode == "extract" else _qi(m)
    spec = mass_spectrum(M, m_used)
    comparisons.extend(spec.checks)
    if spec.negative_branch:
        warnings.append("negative mass branch: m > M")
    if not m_used.is_real():
        warnings.append("m is not real: the mass matrix is not hermitian")
    if not m_used:
        warnings.append("m = 0: the Gxi^j are zero modes of the Dirac operator on S^3")
    if m0 is not None and extracted is not None and m0 != extracted:
        warnings.append(f"constant-spinor eigenvalue {m0} differs from the left-translated eigenvalue {extracted}")
    return {
        "checks": checks,
        "comparisons": comparisons,
        "instances": instances,
        "m": {"mode": m_mode, "value": str(m_used), "extracted": None if extracted is None else str(extracted), "constant_spinor": None if m0 is None else str(m0)},
        "spectrum": spec,
        "derived_mass_matrix": derived_mass_matrix(M, m_used),
        "warnings": warnings,
    }
