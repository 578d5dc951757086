"""Exact gamma-matrix representations of Clif(1,2), Clif(0,3) and Clif(1,5).

Matrices are numpy object arrays of :class:`~kkdirac.qi.QI`, so every
Clifford relation is checked with zero tolerance.  Generator labels follow
the physics convention: ``0, 1, 2`` for the Lorentzian factor and ``5, 6, 7``
for the sphere; the six-dimensional representation uses ``(0, 1, 2, 5, 6, 7)``
and stores them at positions ``0..5``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .qi import QI
from .report import Check
from .symexpr import Expr, cos, sin, const

__all__ = [
    "Signature",
    "GammaRep",
    "SigmaSet",
    "SU2Element",
    "pauli",
    "eye",
    "kron",
    "commutator",
    "anticommutator",
    "build_gamma_1_2",
    "build_gamma_0_3",
    "lift_to_6d",
    "lorentz_generators",
    "verify_clifford_relation",
    "verify_generator_blocks",
    "verify_lorentz_closure",
    "verify_pauli_products",
    "su2_basis",
    "verify_su2_bracket",
    "su2_euler",
    "levi_civita",
    "to_complex",
    "matrix_strings",
]


def _m(rows):
    return np.array([[QI(*v) if isinstance(v, tuple) else QI(v) for v in r] for r in rows], dtype=object)


def eye(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = QI(int(i == j))
    return out


def zeros(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    for idx in np.ndindex(n, n):
        out[idx] = QI(0)
    return out


def kron(*ms) -> np.ndarray:
    out = ms[0]
    for m in ms[1:]:
        out = np.kron(out, m)
    return out


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def is_zero(m) -> bool:
    return all(not x for x in np.asarray(m).flat)


def to_complex(m) -> np.ndarray:
    return np.vectorize(complex, otypes=[complex])(m)


def matrix_strings(m):
    """Row-major ``a/b + c/d*i`` strings for reports."""
    return [[str(x) for x in row] for row in m]


SIGMA1 = _m([[0, 1], [1, 0]])
SIGMA2 = _m([[0, (0, -1)], [(0, 1), 0]])
SIGMA3 = _m([[1, 0], [0, -1]])


def pauli(k: int) -> np.ndarray:
    """The k-th Pauli matrix, k in {1, 2, 3} (also used for tau and rho)."""
    return (SIGMA1, SIGMA2, SIGMA3)[k - 1].copy()


def levi_civita(*idx) -> int:
    """Sign of the permutation ``idx`` of distinct sortable labels, 0 on repeats."""
    if len(set(idx)) != len(idx):
        return 0
    sign = 1
    seq = list(idx)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Signature:
    t: int
    s: int

    def __post_init__(self):
        if self.t < 0 or self.s < 0 or self.t + self.s < 1:
            raise ValueError("signature needs t, s >= 0 and t + s >= 1")

    @property
    def n(self) -> int:
        return self.t + self.s

    def diagonal(self):
        return (-1,) * self.t + (1,) * self.s


@dataclass(frozen=True)
class GammaRep:
    """Gamma matrices ``matrices[k]`` for generator ``labels[k]``."""

    signature: Signature
    labels: tuple
    matrices: tuple

    def __post_init__(self):
        if len(self.labels) != self.signature.n or len(self.matrices) != self.signature.n:
            raise ValueError("need one matrix per generator")
        d = self.matrices[0].shape[0]
        for m in self.matrices:
            if m.shape != (d, d):
                raise ValueError("gamma matrices must be square and of equal size")

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def metric(self):
        return self.signature.diagonal()

    def eta(self, a, b) -> int:
        return self.metric[self.labels.index(a)] if a == b else 0

    def __getitem__(self, label):
        return self.matrices[self.labels.index(label)]

    def replace(self, label, matrix) -> "GammaRep":
        """Copy with one matrix swapped (used to exercise failure paths)."""
        ms = list(self.matrices)
        ms[self.labels.index(label)] = matrix
        return GammaRep(self.signature, self.labels, tuple(ms))


def build_gamma_1_2() -> GammaRep:
    """gamma^0 = i sigma_2, gamma^1 = -sigma_3, gamma^2 = -sigma_1."""
    i = QI(0, 1)
    return GammaRep(Signature(1, 2), (0, 1, 2), (i * SIGMA2, -SIGMA3, -SIGMA1))


def build_gamma_0_3() -> GammaRep:
    """gamma^5 = -tau_3, gamma^6 = tau_1, gamma^7 = tau_2."""
    return GammaRep(Signature(0, 3), (5, 6, 7), (-SIGMA3, SIGMA1.copy(), SIGMA2.copy()))


def lift_to_6d(g3: GammaRep, gS: GammaRep) -> GammaRep:
    """Gamma^a = rho_1 x 1 x gamma^a, Gamma^alpha = rho_2 x gamma^alpha x 1."""
    if g3.signature != Signature(1, 2) or gS.signature != Signature(0, 3):
        raise ValueError("expected the Clif(1,2) and Clif(0,3) representations")
    if g3.dim != 2 or gS.dim != 2:
        raise ValueError("dimension mismatch: 2x2 factors required")
    one = eye(2)
    mats = [kron(SIGMA1, one, g3[a]) for a in g3.labels]
    mats += [kron(SIGMA2, gS[al], one) for al in gS.labels]
    return GammaRep(Signature(1, 5), tuple(g3.labels) + tuple(gS.labels), tuple(mats))


def verify_clifford_relation(g: GammaRep, name: str = "") -> list[Check]:
    """One exact check per unordered pair (including A = B)."""
    d = g.dim
    out = []
    for a, b in itertools.combinations_with_replacement(g.labels, 2):
        lhs = anticommutator(g[a], g[b])
        rhs = eye(d) * (2 * g.eta(a, b))
        ok = is_zero(lhs - rhs)
        out.append(Check.exact(f"{name}{{G{a},G{b}}}=2eta", ok, tag="e7/e8"))
    return out


@dataclass(frozen=True)
class SigmaSet:
    """Lorentz generators Sigma^{AB} = 1/4 [Gamma^A, Gamma^B] for A < B."""

    rep: GammaRep
    generators: dict = field(hash=False, compare=False)

    def __call__(self, a, b) -> np.ndarray:
        if a == b:
            return zeros(self.rep.dim)
        if (a, b) in self.generators:
            return self.generators[(a, b)]
        return -self.generators[(b, a)]

    def pairs(self):
        return list(self.generators)


def lorentz_generators(g: GammaRep) -> SigmaSet:
    quarter = QI(1) / 4
    gens = {}
    for i, a in enumerate(g.labels):
        for b in g.labels[i + 1:]:
            gens[(a, b)] = commutator(g[a], g[b]) * quarter
    return SigmaSet(g, gens)


class _GaussMat:
    """Exact matrix (re + i im) / den with int64 parts, for bulk products."""

    __slots__ = ("re", "im", "den")

    def __init__(self, re, im, den):
        self.re, self.im, self.den = re, im, den

    @classmethod
    def from_qi(cls, m) -> "_GaussMat":
        den = 1
        for x in np.asarray(m).flat:
            den = math.lcm(den, x.re.denominator, x.im.denominator)
        re = np.array([[int(x.re * den) for x in row] for row in m], dtype=np.int64)
        im = np.array([[int(x.im * den) for x in row] for row in m], dtype=np.int64)
        return cls(re, im, den)

    def __matmul__(self, o):
        return _GaussMat(self.re @ o.re - self.im @ o.im, self.re @ o.im + self.im @ o.re, self.den * o.den)

    def __sub__(self, o):
        return _GaussMat(self.re * o.den - o.re * self.den, self.im * o.den - o.im * self.den, self.den * o.den)

    def __add__(self, o):
        return _GaussMat(self.re * o.den + o.re * self.den, self.im * o.den + o.im * self.den, self.den * o.den)

    def scale(self, k: int) -> "_GaussMat":
        return _GaussMat(self.re * k, self.im * k, self.den)

    def is_zero(self) -> bool:
        return not self.re.any() and not self.im.any()


def verify_lorentz_closure(sig: SigmaSet) -> list[Check]:
    """[S^AB, S^CD] = eta^BC S^AD - eta^AC S^BD - eta^BD S^AC + eta^AD S^BC.

    All ordered quadruples are checked in exact Gaussian-integer arithmetic.
    """
    g = sig.rep
    labels = g.labels
    S = {(a, b): _GaussMat.from_qi(sig(a, b)) for a in labels for b in labels}
    bad = []
    count = 0
    for a, b, c, d in itertools.product(labels, repeat=4):
        lhs = S[a, b] @ S[c, d] - S[c, d] @ S[a, b]
        rhs = (
            S[a, d].scale(g.eta(b, c))
            - S[b, d].scale(g.eta(a, c))
            - S[a, c].scale(g.eta(b, d))
            + S[b, c].scale(g.eta(a, d))
        )
        count += 1
        if not (lhs - rhs).is_zero():
            bad.append((a, b, c, d))
    return [
        Check.exact(
            f"so({g.signature.t},{g.signature.s}) closure",
            not bad,
            tag="e9",
            detail={"quadruples": count, "failures": [list(q) for q in bad[:10]]},
        )
    ]


def verify_generator_blocks(sigma6: SigmaSet, g3: GammaRep, gS: GammaRep) -> list[Check]:
    """Compare the six-dimensional generators with the block formulas
    Sigma^{ab} = 1 x 1 x sigma^{ab}, Sigma^{a beta} = (i/2) rho_3 x gamma^beta x gamma^a,
    Sigma^{alpha beta} = 1 x sigma^{alpha beta} x 1."""
    s3 = lorentz_generators(g3)
    sS = lorentz_generators(gS)
    one = eye(2)
    half_i = QI(0, 1) / 2
    out = []
    for A, B in sigma6.pairs():
        if A in g3.labels and B in g3.labels:
            expect, form = kron(one, one, s3(A, B)), "1x1xsigma^ab"
        elif A in gS.labels and B in gS.labels:
            expect, form = kron(one, sS(A, B), one), "1xsigma^ab x1"
        elif A in g3.labels:
            expect, form = kron(SIGMA3, gS[B], g3[A]) * half_i, "(i/2)rho3 x gamma^b x gamma^a"
        else:
            expect, form = -kron(SIGMA3, gS[A], g3[B]) * half_i, "-(i/2)rho3 x gamma^a x gamma^b"
        ok = is_zero(sigma6(A, B) - expect)
        out.append(Check.exact(f"Sigma^{A}{B} = {form}", ok, tag="e9"))
    return out


def verify_pauli_products() -> list[Check]:
    """sigma_i sigma_j = delta_ij + i eps_ijk sigma_k for all nine pairs."""
    out = []
    i_ = QI(0, 1)
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            rhs = eye(2) * int(a == b)
            for c in (1, 2, 3):
                eps = levi_civita(a, b, c)
                if eps:
                    rhs = rhs + pauli(c) * (i_ * eps)
            out.append(Check.exact(f"sigma{a} sigma{b}", is_zero(pauli(a) @ pauli(b) - rhs), tag="prod"))
    return out


def su2_basis(gS: GammaRep | None = None) -> dict:
    """Anti-hermitian su(2) basis X_alpha = (i/2) gamma^alpha.

    With gamma^5,6,7 = -tau_3, tau_1, tau_2 this is X_alpha = -(i/2) t_alpha for
    the Pauli triple t = (tau_3, -tau_1, -tau_2), and [X_a, X_b] = eps_abc X_c
    with eps_567 = +1.
    """
    gS = gS or build_gamma_0_3()
    half_i = QI(0, 1) / 2
    return {al: gS[al] * half_i for al in gS.labels}


def verify_su2_bracket(X: dict) -> list[Check]:
    labels = sorted(X)
    bad = []
    for a, b in itertools.product(labels, repeat=2):
        rhs = zeros(2)
        for c in labels:
            e = levi_civita(a, b, c)
            if e:
                rhs = rhs + X[c] * e
        if not is_zero(commutator(X[a], X[b]) - rhs):
            bad.append((a, b))
    return [Check.exact("su(2) bracket [X_a,X_b]=eps_abc X_c", not bad, tag="su2", detail={"failures": bad})]


@dataclass(frozen=True)
class SU2Element:
    """G(theta, phi, psi) = exp(i tau_3 phi/2) exp(i tau_2 theta/2) exp(i tau_3 psi/2)."""

    theta: Expr
    phi: Expr
    psi: Expr
    matrix: np.ndarray = field(hash=False, compare=False)

    def inverse(self) -> np.ndarray:
        (a, b), (c, d) = self.matrix
        return np.array([[d, -b], [-c, a]], dtype=object)

    def det(self) -> Expr:
        (a, b), (c, d) = self.matrix
        return a * d - b * c


def _as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


def su2_euler(theta, phi, psi) -> SU2Element:
    theta, phi, psi = map(_as_expr, (theta, phi, psi))
    i_ = const(QI(0, 1))
    half = QI(1) / 2
    c, s = cos(theta * half), sin(theta * half)
    ep = cos(phi * half) + i_ * sin(phi * half)
    epc = cos(phi * half) - i_ * sin(phi * half)
    eq = cos(psi * half) + i_ * sin(psi * half)
    eqc = cos(psi * half) - i_ * sin(psi * half)
    m = np.array([[ep * c * eq, ep * s * eqc], [-(epc * s * eq), epc * c * eqc]], dtype=object)
    return SU2Element(theta, phi, psi, m)
