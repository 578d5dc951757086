"""Differential forms with scalar, vector or matrix valued coefficients.

A :class:`Form` stores only strictly increasing index tuples.  Indices are
positions into the basis of its frame: coordinate differentials ``dx^i`` when
``frame == "coord"``, or the 1-forms of a :class:`Coframe` otherwise.

Coefficient blocks come in two flavours:

* symbolic: numpy object arrays of :class:`~kkdirac.symexpr.Expr` with the
  declared block shape (``()`` for scalar forms);
* numeric: complex arrays of shape ``(N,) + shape`` holding values at ``N``
  sample points.  These come from :meth:`Form.evaluate` and are what the
  geometry checks work with.

The exterior derivative needs symbolic coordinate-frame components; wedge,
interior product, Hodge map and frame changes work on either flavour.
Matrix blocks multiply in left-to-right order, so spinor-valued forms keep
their operator ordering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .clifford import levi_civita
from .symexpr import Chart, Expr, Points, const, evaluate_array

__all__ = [
    "Form",
    "Coframe",
    "FrameVector",
    "SingularFrameError",
    "wedge",
    "d",
    "interior",
    "hodge",
    "change_frame",
    "merge_sign",
]


class SingularFrameError(ValueError):
    """The vielbein is (numerically) singular at a requested point."""


def merge_sign(i: tuple, j: tuple):
    """Sign and sorted tuple of ``dx^i ^ dx^j``; ``(0, None)`` on overlap."""
    if set(i) & set(j):
        return 0, None
    seq = i + j
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return (-1) ** inv, tuple(sorted(seq))


def _obj(shape, fill=None):
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        out[idx] = Expr() if fill is None else fill
    return out


def _as_block(v, shape, n):
    """Normalize a coefficient to a block of the right flavour."""
    if n is None:
        if isinstance(v, np.ndarray):
            if v.shape != shape:
                raise ValueError(f"block shape {v.shape} != declared {shape}")
            out = np.empty(shape, dtype=object)
            for idx in np.ndindex(*shape):
                x = v[idx]
                out[idx] = x if isinstance(x, Expr) else const(x)
            return out
        if shape != ():
            raise ValueError("non-scalar form needs array blocks")
        out = np.empty((), dtype=object)
        out[()] = v if isinstance(v, Expr) else const(v)
        return out
    arr = np.asarray(v, dtype=complex)
    if arr.shape == shape:
        arr = np.broadcast_to(arr, (n,) + shape).copy()
    if arr.shape != (n,) + shape:
        raise ValueError(f"numeric block shape {arr.shape} != {(n,) + shape}")
    return arr


def _block_product(x, y, sx, sy, numeric):
    """Coefficient product respecting block multiplication order."""
    if sx == () or sy == ():
        if numeric:
            if sx == ():
                return x.reshape(x.shape + (1,) * len(sy)) * y, sy
            return x * y.reshape(y.shape + (1,) * len(sx)), sx
        if sx == ():
            s = x[()]
            out = _obj(sy)
            for idx in np.ndindex(*sy):
                out[idx] = s * y[idx]
            return out, sy
        s = y[()]
        out = _obj(sx)
        for idx in np.ndindex(*sx):
            out[idx] = x[idx] * s
        return out, sx
    if len(sx) != 2 or sx[1] != sy[0]:
        raise ValueError(f"incompatible block shapes {sx} and {sy}")
    shape = (sx[0],) + sy[1:]
    if numeric:
        if len(sy) == 1:
            return np.einsum("nij,nj->ni", x, y), shape
        return np.matmul(x, y), shape
    out = _obj(shape)
    for idx in np.ndindex(*shape):
        acc = Expr()
        for k in range(sx[1]):
            a, b = x[idx[0], k], y[(k,) + idx[1:]]
            if a and b:
                acc = acc + a * b
        out[idx] = acc
    return out, shape


def _block_is_zero(b, numeric):
    if numeric:
        return not np.any(b)
    return all(x.is_zero() for x in b.flat)


@dataclass(frozen=True, eq=False)
class Form:
    chart: Chart
    degree: int
    components: dict
    shape: tuple = ()
    frame: str = "coord"
    n: int | None = None  # number of sample points for numeric forms

    def __post_init__(self):
        if not 0 <= self.degree:
            raise ValueError("degree must be non-negative")
        object.__setattr__(self, "shape", tuple(self.shape))
        dim = self.chart.dim
        clean = {}
        for idx, blk in self.components.items():
            idx = tuple(idx)
            if len(idx) != self.degree or list(idx) != sorted(set(idx)) or any(not 0 <= i < dim for i in idx):
                raise ValueError(f"bad index tuple {idx} for a {self.degree}-form on {dim} coordinates")
            blk = _as_block(blk, self.shape, self.n)
            if not _block_is_zero(blk, self.numeric):
                clean[idx] = blk
        object.__setattr__(self, "components", clean)

    # -- construction ---------------------------------------------------
    @property
    def numeric(self) -> bool:
        return self.n is not None

    @classmethod
    def zero(cls, chart, degree, shape=(), frame="coord", n=None):
        return cls(chart, degree, {}, shape, frame, n)

    @classmethod
    def scalar(cls, chart, f, frame="coord"):
        return cls(chart, 0, {(): f}, (), frame)

    @classmethod
    def basis(cls, chart, idx, frame="coord"):
        """The basis form ``dx^{i1} ^ ... ^ dx^{ip}`` (any index order)."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return cls.zero(chart, len(idx), (), frame)
        sign = levi_civita(*idx) if idx else 1
        return cls(chart, len(idx), {tuple(sorted(idx)): const(sign)}, (), frame)

    @classmethod
    def one_form(cls, chart, coeffs, frame="coord", shape=(), n=None):
        return cls(chart, 1, {(i,): c for i, c in enumerate(coeffs)}, shape, frame, n)

    def _like(self, degree, comps, shape=None):
        return Form(self.chart, degree, comps, self.shape if shape is None else shape, self.frame, self.n)

    def _zero_block(self, shape=None):
        shape = self.shape if shape is None else shape
        if self.numeric:
            return np.zeros((self.n,) + shape, dtype=complex)
        return _obj(shape)

    def component(self, idx):
        """Coefficient on an index tuple in any order (antisymmetric)."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return self._zero_block()
        srt = tuple(sorted(idx))
        blk = self.components.get(srt)
        if blk is None:
            return self._zero_block()
        return blk * levi_civita(*idx) if self.degree > 1 else blk

    # -- linear structure -----------------------------------------------
    def _check(self, other):
        if not isinstance(other, Form):
            raise TypeError("expected a Form")
        if other.chart != self.chart or other.frame != self.frame:
            raise ValueError("forms live on different charts or frames")
        if other.n != self.n:
            raise ValueError("mixing symbolic and numeric forms (or different sample sets)")

    def __add__(self, other):
        self._check(other)
        # an empty form (e.g. iota of a function, or a degree overflow) is zero in every degree
        if not other.components and other.degree != self.degree:
            return self
        if not self.components and other.degree != self.degree:
            return other
        if self.degree != other.degree or self.shape != other.shape:
            raise ValueError("can only add forms of equal degree and block shape")
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps[k] + v if k in comps else v
        return self._like(self.degree, comps)

    def __neg__(self):
        return self._like(self.degree, {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Multiply by a scalar: number, Expr, or (for numeric forms) an (N,) array."""
        if self.numeric and isinstance(c, np.ndarray) and c.ndim == 1:
            r = c.reshape((-1,) + (1,) * len(self.shape))
            return self._like(self.degree, {k: v * r for k, v in self.components.items()})
        if not self.numeric and not isinstance(c, Expr):
            c = const(c)
        if self.numeric:
            c = complex(c)
        return self._like(self.degree, {k: v * c for k, v in self.components.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def left(self, m):
        """Apply a constant matrix (or numeric (N, r, c) stack) on the left of every block."""
        m = np.asarray(m)
        if self.numeric:
            mm = m.astype(complex) if m.dtype != object else np.vectorize(complex, otypes=[complex])(m)
            if mm.ndim == 2:
                mm = np.broadcast_to(mm, (self.n,) + mm.shape)
            comps = {k: _block_product(mm, v, mm.shape[1:], self.shape, True)[0] for k, v in self.components.items()}
            shape = (mm.shape[1],) + self.shape[1:]
        else:
            blk = _as_block(m, m.shape, None)
            comps = {k: _block_product(blk, v, m.shape, self.shape, False)[0] for k, v in self.components.items()}
            shape = (m.shape[0],) + self.shape[1:]
        return self._like(self.degree, comps, shape)

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.numeric:
            return all(np.max(np.abs(v)) <= tol for v in self.components.values())
        return not self.components

    def max_abs(self) -> float:
        if not self.numeric:
            raise TypeError("evaluate the form first")
        return max((float(np.max(np.abs(v))) for v in self.components.values()), default=0.0)

    def per_point_max(self) -> np.ndarray:
        if not self.numeric:
            raise TypeError("evaluate the form first")
        out = np.zeros(self.n)
        for v in self.components.values():
            out = np.maximum(out, np.abs(v).reshape(self.n, -1).max(axis=1))
        return out

    # -- evaluation / serialization -------------------------------------
    def evaluate(self, points: Points, cache=None) -> "Form":
        if self.numeric:
            return self
        cache = {} if cache is None else cache
        comps = {k: evaluate_array(v, points, cache) for k, v in self.components.items()}
        return Form(self.chart, self.degree, comps, self.shape, self.frame, points.n)

    def to_dict(self) -> dict:
        def blk(v):
            if self.numeric:
                return np.asarray(v).tolist()
            return np.vectorize(str, otypes=[object])(v).tolist() if v.shape else str(v[()])

        return {
            "degree": self.degree,
            "frame": self.frame,
            "components": {",".join(map(str, k)): blk(v) for k, v in sorted(self.components.items())},
        }

    def __repr__(self):
        kind = f"numeric[{self.n}]" if self.numeric else "symbolic"
        return f"Form(degree={self.degree}, frame={self.frame!r}, shape={self.shape}, {kind}, terms={len(self.components)})"


def wedge(a: Form, b: Form) -> Form:
    a._check(b)
    deg = a.degree + b.degree
    out_shape = None
    comps = {}
    if deg <= a.chart.dim:
        for i, x in a.components.items():
            for j, y in b.components.items():
                s, k = merge_sign(i, j)
                if not s:
                    continue
                p, out_shape = _block_product(x, y, a.shape, b.shape, a.numeric)
                p = p if s > 0 else -p
                comps[k] = comps[k] + p if k in comps else p
    if out_shape is None:
        _, out_shape = _block_product(a._zero_block(), b._zero_block(), a.shape, b.shape, a.numeric)
    if deg > a.chart.dim:
        return _overflow(a, out_shape)
    return Form(a.chart, deg, comps, out_shape, a.frame, a.n)


def _overflow(a, shape):
    # degree beyond the chart dimension: the canonical zero top-degree-plus-one form
    f = Form.__new__(Form)
    object.__setattr__(f, "chart", a.chart)
    object.__setattr__(f, "degree", a.chart.dim + 1)
    object.__setattr__(f, "components", {})
    object.__setattr__(f, "shape", shape)
    object.__setattr__(f, "frame", a.frame)
    object.__setattr__(f, "n", a.n)
    return f


def d(a: Form) -> Form:
    """Exterior derivative of a symbolic coordinate-frame form."""
    if a.numeric:
        raise TypeError("d needs symbolic components")
    if a.frame != "coord":
        raise ValueError("convert to the coordinate frame before taking d")
    coords = a.chart.coords
    if a.degree >= a.chart.dim:
        return _overflow(a, a.shape) if a.degree == a.chart.dim else a
    comps = {}
    for idx, blk in a.components.items():
        for k, c in enumerate(coords):
            if k in idx:
                continue
            db = _obj(a.shape)
            nz = False
            for pos in np.ndindex(*a.shape):
                v = blk[pos].diff(c)
                db[pos] = v
                nz = nz or bool(v._terms)
            if not nz:
                continue
            s, key = merge_sign((k,), idx)
            if s < 0:
                db = -db
            comps[key] = comps[key] + db if key in comps else db
    return Form(a.chart, a.degree + 1, comps, a.shape, a.frame)


@dataclass(frozen=True, eq=False)
class FrameVector:
    """Vector field given by its pairings ``iota_X(b_i)`` with the basis 1-forms
    ``b_i`` of ``frame`` (for the coordinate frame: the components ``X^i``)."""

    chart: Chart
    components: tuple
    frame: str = "coord"
    n: int | None = None

    def __post_init__(self):
        if len(self.components) != self.chart.dim:
            raise ValueError("one component per coordinate required")
        comps = []
        for c in self.components:
            if self.n is None:
                comps.append(c if isinstance(c, Expr) else const(c))
            else:
                v = np.asarray(c, dtype=complex)
                comps.append(np.broadcast_to(v, (self.n,)).copy() if v.ndim == 0 else v)
        object.__setattr__(self, "components", tuple(comps))

    def pair(self, one_form: Form):
        """Scalar ``iota_X(a)`` for a 1-form ``a``."""
        return interior(self, one_form)


def interior(X: FrameVector, a: Form) -> Form:
    """Interior product; anti-derivation of degree -1."""
    if X.chart != a.chart or X.frame != a.frame:
        raise ValueError("vector and form must share chart and frame")
    if a.degree == 0:
        return a._like(0, {})
    numeric = a.numeric or X.n is not None
    n = a.n if a.n is not None else X.n
    comps = {}
    for idx, blk in a.components.items():
        for pos, i in enumerate(idx):
            xi = X.components[i]
            if isinstance(xi, Expr) and xi.is_zero():
                continue
            rest = idx[:pos] + idx[pos + 1:]
            if numeric:
                if not a.numeric:
                    raise TypeError("evaluate the form before contracting with a numeric vector")
                if X.n is not None:
                    term = blk * xi.reshape((-1,) + (1,) * len(a.shape))
                elif xi.is_constant():
                    term = blk * complex(xi.constant_value())
                else:
                    raise TypeError("evaluate the vector before contracting with a numeric form")
            else:
                term = _obj(a.shape)
                for p in np.ndindex(*a.shape):
                    term[p] = xi * blk[p]
            if pos % 2:
                term = -term
            comps[rest] = comps[rest] + term if rest in comps else term
    return Form(a.chart, a.degree - 1, comps, a.shape, a.frame, n)


@dataclass(frozen=True, eq=False)
class Coframe:
    """Orthonormal coframe ``E_A = V[A, i] dx^i`` with signature and orientation.

    ``labels`` name the frame directions (e.g. ``(0, 1, 2)``); ``orientation``
    lists the labels in the order declared positive.  Frame vectors ``X_A``
    are dual to ``E^A = eta^{AA} E_A``, i.e. ``iota_{X_A} E_B = eta_{AB}``.
    """

    chart: Chart
    vielbein: np.ndarray
    signature: tuple
    labels: tuple
    orientation: tuple
    name: str = "frame"

    def __post_init__(self):
        n = self.chart.dim
        v = np.asarray(self.vielbein, dtype=object)
        if v.shape != (n, n):
            raise ValueError("vielbein must be square with one column per coordinate")
        v = _as_block(v, (n, n), None)
        object.__setattr__(self, "vielbein", v)
        object.__setattr__(self, "signature", tuple(int(s) for s in self.signature))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "orientation", tuple(self.orientation))
        if any(s not in (-1, 1) for s in self.signature) or len(self.signature) != n:
            raise ValueError("signature must be n entries of +-1")
        if sorted(self.orientation) != sorted(self.labels) or len(set(self.labels)) != n:
            raise ValueError("orientation must be a permutation of the labels")
        if self.name == "coord":
            raise ValueError("'coord' is reserved for the coordinate frame")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def pos(self, label) -> int:
        return self.labels.index(label)

    def eta(self, label) -> int:
        return self.signature[self.pos(label)]

    def sign_det(self) -> int:
        return int(np.prod(self.signature))

    def form(self, label) -> Form:
        """``E_label`` in the coordinate frame (symbolic)."""
        return Form.one_form(self.chart, list(self.vielbein[self.pos(label)]))

    def basis_form(self, label) -> Form:
        """``E_label`` in this coframe (component 1 on its own index)."""
        return Form(self.chart, 1, {(self.pos(label),): const(1)}, (), self.name)

    def volume(self) -> Form:
        """``E_{o1} ^ ... ^ E_{on}`` in the declared orientation order, frame basis."""
        idx = tuple(self.pos(l) for l in self.orientation)
        return Form(self.chart, self.dim, {tuple(sorted(idx)): const(levi_civita(*idx))}, (), self.name)

    def frame_vector(self, label, n=None) -> FrameVector:
        """``X_label`` expressed through its pairings with the frame basis."""
        comps = [0] * self.dim
        comps[self.pos(label)] = self.eta(label)
        return FrameVector(self.chart, tuple(comps), self.name, n)

    def matrices(self, points: Points, cache=None, tol: float = 1e-10):
        """Numeric vielbein ``V`` (N, n, n) and inverse ``W`` with ``V @ W = 1``."""
        V = evaluate_array(self.vielbein, points, cache)
        det = np.linalg.det(V)
        bad = np.flatnonzero(np.abs(det) <= tol)
        if bad.size:
            raise SingularFrameError(
                f"vielbein of {self.name!r} is singular at sample point(s) {bad.tolist()[:5]} (|det| <= {tol:g})"
            )
        return V, np.linalg.inv(V)

    def coordinate_vectors(self, points: Points, cache=None) -> dict:
        """Frame vectors ``X_A`` as numeric coordinate-frame vectors."""
        _, W = self.matrices(points, cache)
        out = {}
        for A in self.labels:
            p = self.pos(A)
            out[A] = FrameVector(self.chart, tuple(W[:, i, p] * self.eta(A) for i in range(self.dim)), "coord", points.n)
        return out


def _minor_dets(M, rows, cols):
    """Batched determinants of ``M[:, rows][:, :, cols]``."""
    if not rows:
        return np.ones(M.shape[0], dtype=complex)
    sub = M[:, list(rows)][:, :, list(cols)]
    return np.linalg.det(sub)


def change_frame(a: Form, cf: Coframe, points: Points, to: str, cache=None) -> Form:
    """Convert components between the coordinate frame and ``cf``.

    ``to`` is ``"frame"`` or ``"coord"``.  The result is numeric.
    """
    if a.chart != cf.chart:
        raise ValueError("form and coframe live on different charts")
    src = a.frame
    if to == "frame" and src != "coord" or to == "coord" and src != cf.name:
        raise ValueError(f"cannot convert a {src!r}-frame form to {to!r} with coframe {cf.name!r}")
    if to not in ("frame", "coord"):
        raise ValueError("to must be 'frame' or 'coord'")
    num = a.evaluate(points, cache)
    V, W = cf.matrices(points, cache)
    # omega = sum_I w_I dx^I = sum_A w_A E^A ... with E_A = V[A, i] dx^i, dx^i = W[i, A] E_A
    M = W if to == "frame" else V
    n = cf.dim
    comps = {}
    for J in itertools.combinations(range(n), a.degree):
        acc = None
        for I, blk in num.components.items():
            # to frame: w_J = sum_I w_I det(W[I, J]); to coord: w_J = sum_I w_I det(V[I, J])
            c = _minor_dets(M, I, J)
            term = blk * c.reshape((-1,) + (1,) * len(a.shape))
            acc = term if acc is None else acc + term
        if acc is not None:
            comps[J] = acc
    frame = cf.name if to == "frame" else "coord"
    return Form(a.chart, a.degree, comps, a.shape, frame, points.n)


def hodge(a: Form, cf: Coframe) -> Form:
    """Hodge map in the orthonormal frame of ``cf``.

    Fixed by ``alpha ^ *beta = <alpha, beta> vol`` with ``vol`` the ordered
    wedge of the coframe in the declared orientation.
    """
    if a.frame != cf.name:
        raise ValueError("hodge needs components in the coframe's own basis")
    n = cf.dim
    opos = [cf.pos(l) for l in cf.orientation]
    comps = {}
    for I, blk in a.components.items():
        J = tuple(k for k in range(n) if k not in I)
        norm = 1
        for i in I:
            norm *= cf.signature[i]
        s = norm * levi_civita(*[opos.index(x) for x in I + J])
        comps[J] = blk * s
    return a._like(n - a.degree, comps)
