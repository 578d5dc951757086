"""Exact symbolic scalar expressions over chart coordinates.

Expressions are kept in an expanded sum-of-products normal form.  A product
term is a coefficient (exact complex rational) times

* integer powers of coordinate symbols (negative exponents allowed),
* at most one trigonometric factor ``cos(L)`` or ``sin(L)`` where ``L`` is a
  real rational linear combination of coordinates plus a rational constant,
* "opaque" atoms: ``sin(u)``/``cos(u)`` of non-linear ``u`` and reciprocals
  ``1/u`` of expressions that are not single monomials.

Products of trigonometric factors of linear arguments are reduced with the
product-to-sum formulas, so trigonometric polynomials have a unique
representation and cancel exactly; ``sin(t)**2 + cos(t)**2`` is ``1`` as soon
as it is built.  Opaque ``sin(u)**2`` is rewritten to ``1 - cos(u)**2``.
Identities outside this normal form are left for numerical checks.

Plain-text serialization uses s-expressions, see :func:`to_sexpr`.
"""

from __future__ import annotations

import ast
import re
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .qi import QI, as_qi

__all__ = [
    "Expr",
    "Chart",
    "Points",
    "MissingCoordinateError",
    "UnknownCoordinateError",
    "sym",
    "const",
    "sin",
    "cos",
    "differentiate",
    "evaluate",
    "simplify",
    "to_sexpr",
    "parse_sexpr",
    "parse_infix",
    "evaluate_array",
]

_HALF = Fraction(1, 2)


class MissingCoordinateError(KeyError):
    """An evaluation point does not assign a coordinate the expression uses."""


class UnknownCoordinateError(ValueError):
    """Differentiation with respect to a symbol outside the chart."""


# ---------------------------------------------------------------------------
# monomials
#
# A monomial is a triple (syms, trig, opq):
#   syms: tuple[(name, int exp)] sorted by name, exp != 0
#   trig: None | (kind, lin) with kind in {"c", "s"},
#         lin = (tuple[(name, Fraction)] sorted, Fraction const)
#   opq:  tuple[(atom, int exp)] sorted by atom key; atom is
#         ("inv", Expr) | ("sin", Expr) | ("cos", Expr)
# ---------------------------------------------------------------------------

_ONE_MONO = ((), None, ())


def _canon_lin(lin):
    """Return (sign, lin') with the leading nonzero coefficient of lin' positive."""
    terms, c = lin
    lead = terms[0][1] if terms else c
    if lead < 0:
        return -1, (tuple((n, -q) for n, q in terms), -c)
    return 1, lin


def _canon_trig(kind, lin):
    """Canonical (factor, trig) for cos/sin of a linear argument; factor 0 means zero."""
    terms, c = lin
    if not terms and c == 0:
        return (1, None) if kind == "c" else (0, None)
    sign, lin2 = _canon_lin(lin)
    if kind == "c":
        return 1, ("c", lin2)
    return sign, ("s", lin2)


def _lin_add(a, b, sb=1):
    d = dict(a[0])
    for n, q in b[0]:
        v = d.get(n, 0) + sb * q
        if v:
            d[n] = v
        else:
            d.pop(n, None)
    return tuple(sorted(d.items())), a[1] + sb * b[1]


def _trig_mul(t1, t2):
    """Product of two trig factors as a list of (Fraction factor, trig)."""
    if t1 is None:
        return [(Fraction(1), t2)]
    if t2 is None:
        return [(Fraction(1), t1)]
    k1, a = t1
    k2, b = t2
    diff = _lin_add(a, b, -1)
    summ = _lin_add(a, b, 1)
    if k1 == "c" and k2 == "c":
        parts = [(_HALF, "c", diff), (_HALF, "c", summ)]
    elif k1 == "s" and k2 == "s":
        parts = [(_HALF, "c", diff), (-_HALF, "c", summ)]
    elif k1 == "s" and k2 == "c":
        parts = [(_HALF, "s", summ), (_HALF, "s", diff)]
    else:  # cos(a) sin(b) = 1/2 [sin(a+b) - sin(a-b)]
        parts = [(_HALF, "s", summ), (-_HALF, "s", diff)]
    out = []
    for f, kind, lin in parts:
        s, t = _canon_trig(kind, lin)
        if s:
            out.append((f * s, t))
    return out


def _merge_powers(p1, p2, key=None):
    d = dict(p1)
    for k, e in p2:
        v = d.get(k, 0) + e
        if v:
            d[k] = v
        else:
            d.pop(k, None)
    if key is None:
        return tuple(sorted(d.items()))
    return tuple(sorted(d.items(), key=lambda kv: key(kv[0])))


def _atom_key(atom):
    return (atom[0], atom[1].key())


def _rewrite_opaque(opq):
    """Apply sin(u)^2 -> 1 - cos(u)^2 to opaque factors; returns list of (factor, opq)."""
    for idx, (atom, e) in enumerate(opq):
        if atom[0] == "sin" and e >= 2:
            rest = list(opq)
            if e == 2:
                del rest[idx]
            else:
                rest[idx] = (atom, e - 2)
            base = tuple(rest)
            cos_atom = (("cos", atom[1]), 2)
            with_cos = _merge_powers(base, (cos_atom,), _atom_key)
            out = []
            for f, o in _rewrite_opaque(base):
                out.append((f, o))
            for f, o in _rewrite_opaque(with_cos):
                out.append((-f, o))
            return out
    return [(1, opq)]


def _mono_mul(m1, m2):
    if m1 == _ONE_MONO:
        return [(Fraction(1), m2)]
    if m2 == _ONE_MONO:
        return [(Fraction(1), m1)]
    syms = _merge_powers(m1[0], m2[0])
    if m1[2] and m2[2]:
        opq_list = _rewrite_opaque(_merge_powers(m1[2], m2[2], _atom_key))
    else:
        opq_list = [(1, m1[2] or m2[2])]
    out = []
    for ft, trig in _trig_mul(m1[1], m2[1]):
        for fo, opq in opq_list:
            out.append((ft * fo, (syms, trig, opq)))
    return out


# ---------------------------------------------------------------------------
# Expr
# ---------------------------------------------------------------------------


class Expr:
    """Immutable scalar expression in normal form.  Build with :func:`sym`,
    :func:`const`, arithmetic operators, :func:`sin` and :func:`cos`."""

    __slots__ = ("_terms", "_hash", "_key")

    def __init__(self, terms=None):
        self._terms = {} if terms is None else terms
        self._hash = None
        self._key = None

    @classmethod
    def _from(cls, acc):
        return cls({m: c for m, c in acc.items() if c})

    # -- basic views ------------------------------------------------------
    @property
    def terms(self):
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == _ONE_MONO for m in self._terms)

    def constant_value(self) -> QI:
        if not self.is_constant():
            raise ValueError("expression is not constant")
        return self._terms.get(_ONE_MONO, QI(0))

    def free_symbols(self) -> frozenset:
        out = set()
        for syms, trig, opq in self._terms:
            out.update(n for n, _ in syms)
            if trig is not None:
                out.update(n for n, _ in trig[1][0])
            for atom, _ in opq:
                out |= atom[1].free_symbols()
        return frozenset(out)

    def linear_form(self):
        """(terms, const) if this is a real rational affine function, else None."""
        lin = {}
        c = Fraction(0)
        for (syms, trig, opq), coef in self._terms.items():
            if trig is not None or opq or coef.im != 0:
                return None
            if not syms:
                c += coef.re
            elif len(syms) == 1 and syms[0][1] == 1:
                lin[syms[0][0]] = coef.re
            else:
                return None
        return tuple(sorted(lin.items())), c

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if not o._terms:
            return self
        if not self._terms:
            return o
        acc = dict(self._terms)
        for m, c in o._terms.items():
            acc[m] = acc[m] + c if m in acc else c
        return Expr._from(acc)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        q = as_qi(other)
        if q is not NotImplemented:
            if not q:
                return Expr()
            return Expr({m: c * q for m, c in self._terms.items()})
        if not isinstance(other, Expr):
            return NotImplemented
        if not self._terms or not other._terms:
            return Expr()
        if other.is_constant():
            return self * other._terms[_ONE_MONO]
        if self.is_constant():
            return other * self._terms[_ONE_MONO]
        acc = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                c12 = c1 * c2
                for f, m in _mono_mul(m1, m2):
                    v = c12 * f
                    acc[m] = acc[m] + v if m in acc else v
        return Expr._from(acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.reciprocal()

    def __pow__(self, n):
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.reciprocal() ** (-n)
        out = Expr.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def reciprocal(self) -> "Expr":
        if not self._terms:
            raise ZeroDivisionError("reciprocal of zero expression")
        if len(self._terms) > 1:
            return Expr({((), None, (((("inv", self)), 1),)): QI(1)})
        (syms, trig, opq), coef = next(iter(self._terms.items()))
        out = Expr({(tuple((n, -e) for n, e in syms), None, ()): coef.inverse()})
        if trig is not None:
            out = out * _inv_atom(Expr({((), trig, ()): QI(1)}))
        for atom, e in opq:
            if atom[0] == "inv":
                out = out * atom[1] ** e
            else:
                out = out * _inv_atom(Expr({((), None, ((atom, e),)): QI(1)}))
        return out

    def conjugate(self) -> "Expr":
        """Complex conjugate assuming real coordinates."""
        out = Expr()
        for (syms, trig, opq), c in self._terms.items():
            t = Expr({(syms, trig, ()): c.conjugate()})
            for atom, e in opq:
                t = t * Expr({((), None, (((atom[0], atom[1].conjugate()), e),)): QI(1)})
            out = out + t
        return out

    # -- equality ---------------------------------------------------------
    def __eq__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def key(self) -> str:
        if self._key is None:
            self._key = to_sexpr(self)
        return self._key

    def __repr__(self):
        return f"Expr({to_sexpr(self)})"

    def __str__(self):
        return to_sexpr(self)

    # -- calculus ---------------------------------------------------------
    def diff(self, name: str) -> "Expr":
        out = {}
        for mono, c in self._terms.items():
            for m, f in _mono_diff(mono, name):
                v = c * f
                out[m] = out[m] + v if m in out else v
        return Expr._from(out)

    # -- numerics ---------------------------------------------------------
    def evaluate(self, point):
        """Value at ``point`` (mapping coordinate -> number or ndarray)."""
        return self._eval(point, {})

    def _eval(self, env, cache):
        total = 0j
        for mono, c in self._terms.items():
            v = complex(c)
            syms, trig, opq = mono
            for n, e in syms:
                v = v * _sym_pow(env, cache, n, e)
            if trig is not None:
                v = v * _trig_val(env, cache, trig)
            for atom, e in opq:
                v = v * _atom_val(env, cache, atom) ** e
            total = total + v
        return total

    @staticmethod
    def one():
        return Expr({_ONE_MONO: QI(1)})


def _inv_atom(u: Expr) -> Expr:
    return Expr({((), None, ((("inv", u), 1),)): QI(1)})


def _coerce(x):
    if isinstance(x, Expr):
        return x
    q = as_qi(x)
    if q is NotImplemented:
        return NotImplemented
    return const(q)


def _mono_expr(syms=(), trig=None, opq=(), coef=1):
    return Expr({(tuple(syms), trig, tuple(opq)): as_qi(coef)})


def _mono_diff(mono, name):
    """Derivative of a monomial as list of (mono, QI factor)."""
    syms, trig, opq = mono
    out = []
    # symbol powers
    for idx, (n, e) in enumerate(syms):
        if n != name:
            continue
        new = list(syms)
        if e == 1:
            del new[idx]
        else:
            new[idx] = (n, e - 1)
        out.append(((tuple(new), trig, opq), QI(e)))
    # trig factor of a linear argument
    if trig is not None:
        kind, lin = trig
        q = dict(lin[0]).get(name)
        if q:
            if kind == "c":
                out.append(((syms, ("s", lin), opq), QI(-q)))
            else:
                out.append(((syms, ("c", lin), opq), QI(q)))
    # opaque atoms: chain rule through Expr arithmetic
    if opq:
        extra = Expr()
        for idx, (atom, e) in enumerate(opq):
            kind, u = atom
            du = u.diff(name)
            if du.is_zero():
                continue
            rest = list(opq)
            del rest[idx]
            base = _mono_expr(syms, trig, ())
            for a2, e2 in rest:
                base = base * _mono_expr((), None, ((a2, e2),))
            if kind == "inv":
                part = _mono_expr((), None, ((atom, e + 1),), -e) * du
            elif kind == "sin":
                part = _mono_expr((), None, (((("cos", u)), 1),), 1) * du
                if e > 1:
                    part = part * _mono_expr((), None, ((atom, e - 1),), e)
            else:
                part = _mono_expr((), None, (((("sin", u)), 1),), -1) * du
                if e > 1:
                    part = part * _mono_expr((), None, ((atom, e - 1),), e)
            extra = extra + base * part
        for m, c in extra._terms.items():
            out.append((m, c))
    return out


def _sym_pow(env, cache, n, e):
    key = ("x", n, e)
    v = cache.get(key)
    if v is None:
        try:
            base = env[n]
        except KeyError:
            raise MissingCoordinateError(n) from None
        if isinstance(base, np.ndarray):
            base = base.astype(complex) if e < 0 else base
        v = base**e if e >= 0 else 1.0 / (np.asarray(base, dtype=complex) ** (-e))
        cache[key] = v
    return v


def _trig_val(env, cache, trig):
    v = cache.get(trig)
    if v is None:
        kind, (terms, c) = trig
        arg = float(c)
        for n, q in terms:
            try:
                arg = arg + float(q) * env[n]
            except KeyError:
                raise MissingCoordinateError(n) from None
        v = np.cos(arg) if kind == "c" else np.sin(arg)
        cache[trig] = v
    return v


def _atom_val(env, cache, atom):
    key = ("atom", atom)
    v = cache.get(key)
    if v is None:
        kind, u = atom
        uv = u._eval(env, cache)
        if kind == "inv":
            v = 1.0 / uv
        elif kind == "sin":
            v = np.sin(uv)
        else:
            v = np.cos(uv)
        cache[key] = v
    return v


# ---------------------------------------------------------------------------
# public constructors and operations
# ---------------------------------------------------------------------------


def sym(name: str) -> Expr:
    if not isinstance(name, str) or not name.isidentifier():
        raise ValueError(f"invalid coordinate name {name!r}")
    return Expr({(((name, 1),), None, ()): QI(1)})


def const(value) -> Expr:
    q = as_qi(value)
    if q is NotImplemented:
        raise TypeError(f"exact constant required, got {type(value).__name__}")
    return Expr({_ONE_MONO: q}) if q else Expr()


def _trig(short, name, e):
    e = _coerce(e)
    lin = e.linear_form()
    if lin is None:
        return Expr({((), None, (((name, e), 1),)): QI(1)})
    s, t = _canon_trig(short, lin)
    if not s:
        return Expr()
    if t is None:
        return const(s)
    return Expr({((), t, ()): QI(s)})


def sin(e) -> Expr:
    return _trig("s", "sin", e)


def cos(e) -> Expr:
    return _trig("c", "cos", e)


def differentiate(e: Expr, coord: str, chart: "Chart | None" = None) -> Expr:
    """Exact partial derivative.  With a chart, unknown coordinates raise."""
    if chart is not None and coord not in chart.coords:
        raise UnknownCoordinateError(f"{coord!r} is not a coordinate of chart {chart.name!r}")
    return _coerce(e).diff(coord)


def evaluate(e: Expr, point) -> complex:
    return complex(_coerce(e).evaluate(point))


def simplify(e: Expr) -> Expr:
    """Canonical form.  Expressions are normalized on construction, so this
    re-expands the opaque factors and returns an equal expression."""
    e = _coerce(e)
    out = Expr()
    for (syms, trig, opq), c in e._terms.items():
        t = Expr({(syms, trig, ()): c})
        for atom, k in opq:
            t = t * Expr({((), None, ((atom, k),)): QI(1)})
        out = out + t
    return out


def evaluate_array(exprs, points, cache=None) -> np.ndarray:
    """Evaluate an object array of expressions at a batch of points.

    Returns a complex array of shape ``(len(points),) + exprs.shape``.
    """
    exprs = np.asarray(exprs, dtype=object)
    n = len(points)
    cache = {} if cache is None else cache
    out = np.zeros((n,) + exprs.shape, dtype=complex)
    for idx in np.ndindex(exprs.shape):
        e = exprs[idx]
        if isinstance(e, Expr):
            if e._terms:
                out[(slice(None),) + idx] = e._eval(points, cache)
        else:
            out[(slice(None),) + idx] = complex(e)
    return out


# ---------------------------------------------------------------------------
# charts and sample points
# ---------------------------------------------------------------------------


class Points(Mapping):
    """A batch of ``n`` points: coordinate name -> float array of length n."""

    def __init__(self, data):
        data = {k: np.asarray(v, dtype=float).reshape(-1) for k, v in data.items()}
        sizes = {len(v) for v in data.values()}
        if len(sizes) > 1:
            raise ValueError("coordinate arrays differ in length")
        self._data = data
        self.n = sizes.pop() if sizes else 0

    def __getitem__(self, k):
        return self._data[k]

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return self.n

    def merge(self, other: "Points") -> "Points":
        if other.n != self.n:
            raise ValueError("point batches differ in size")
        return Points({**self._data, **other._data})

    def point(self, i: int) -> dict:
        return {k: float(v[i]) for k, v in self._data.items()}

    def take(self, idx) -> "Points":
        return Points({k: v[idx] for k, v in self._data.items()})


@dataclass(frozen=True)
class Chart:
    """Named coordinate chart with an open validity box per coordinate."""

    name: str
    coords: tuple
    box: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "box", tuple(tuple(map(float, b)) for b in self.box))
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("chart coordinates must be distinct")
        if len(self.box) != len(self.coords):
            raise ValueError("one interval per coordinate required")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError("empty validity interval")
        for c in self.coords:
            if c in _RESERVED or not c.isidentifier():
                raise ValueError(f"invalid coordinate name {c!r}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise UnknownCoordinateError(name) from None

    def symbols(self):
        return tuple(sym(c) for c in self.coords)

    def sample(self, n: int, seed: int, shrink: float = 0.05) -> Points:
        """Seeded points inside the box shrunk by ``shrink`` of its width per side."""
        rng = np.random.default_rng(seed)
        data = {}
        for c, (lo, hi) in zip(self.coords, self.box):
            w = hi - lo
            data[c] = rng.uniform(lo + shrink * w, hi - shrink * w, size=n)
        return Points(data)

    def product(self, other: "Chart", name: str | None = None) -> "Chart":
        if set(self.coords) & set(other.coords):
            raise ValueError("product charts need disjoint coordinates")
        return Chart(name or f"{self.name}x{other.name}", self.coords + other.coords, self.box + other.box)


_RESERVED = {"I", "sin", "cos", "rat", "cplx", "add", "mul", "pow"}


# ---------------------------------------------------------------------------
# s-expression serialization
#
#   expr  := NAME | (rat P Q) | (cplx (rat P Q) (rat P Q)) | (add expr+)
#          | (mul expr+) | (pow expr INT) | (sin expr) | (cos expr)
# ---------------------------------------------------------------------------


def _rat(f: Fraction) -> str:
    return f"(rat {f.numerator} {f.denominator})"


def _coef_sexpr(c: QI) -> str:
    if c.im == 0:
        return _rat(c.re)
    return f"(cplx {_rat(c.re)} {_rat(c.im)})"


def _lin_sexpr(lin) -> str:
    terms, c = lin
    parts = []
    for n, q in terms:
        parts.append(n if q == 1 else f"(mul {_rat(q)} {n})")
    if c:
        parts.append(_rat(c))
    return parts[0] if len(parts) == 1 else "(add " + " ".join(parts) + ")"


def _term_sexpr(mono, c: QI) -> str:
    syms, trig, opq = mono
    factors = []
    if c != 1 or mono == _ONE_MONO:
        factors.append(_coef_sexpr(c))
    for n, e in syms:
        factors.append(n if e == 1 else f"(pow {n} {e})")
    if trig is not None:
        factors.append(f"({'cos' if trig[0] == 'c' else 'sin'} {_lin_sexpr(trig[1])})")
    for (kind, u), e in opq:
        if kind == "inv":
            factors.append(f"(pow {to_sexpr(u)} {-e})")
        else:
            base = f"({kind} {to_sexpr(u)})"
            factors.append(base if e == 1 else f"(pow {base} {e})")
    return factors[0] if len(factors) == 1 else "(mul " + " ".join(factors) + ")"


def to_sexpr(e: Expr) -> str:
    """Deterministic s-expression text for ``e``."""
    e = _coerce(e)
    if not e._terms:
        return "(rat 0 1)"
    parts = sorted(_term_sexpr(m, c) for m, c in e._terms.items())
    return parts[0] if len(parts) == 1 else "(add " + " ".join(parts) + ")"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_sexpr(text: str) -> Expr:
    tokens = _TOKEN.findall(text)
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of s-expression")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ValueError("unexpected ')'")
        if tok != "(":
            if re.fullmatch(r"[-+]?\d+", tok):
                return int(tok)
            return sym(tok)
        head = tokens[pos]
        pos += 1
        args = []
        while tokens[pos] != ")":
            args.append(parse())
        pos += 1
        if head == "rat":
            return const(Fraction(args[0], args[1]))
        if head == "cplx":
            return args[0] + args[1] * const(QI(0, 1))
        if head == "add":
            out = Expr()
            for a in args:
                out = out + a
            return out
        if head == "mul":
            out = Expr.one()
            for a in args:
                out = out * a
            return out
        if head == "pow":
            return _coerce(args[0]) ** int(args[1])
        if head == "sin":
            return sin(args[0])
        if head == "cos":
            return cos(args[0])
        raise ValueError(f"unknown s-expression head {head!r}")

    out = parse()
    if pos != len(tokens):
        raise ValueError("trailing tokens in s-expression")
    return _coerce(out)


# ---------------------------------------------------------------------------
# infix parsing for configuration files
# ---------------------------------------------------------------------------


def parse_infix(text: str, coords=None) -> Expr:
    """Parse ``"x0**2 + 1/2*sin(x1) - I*x2"``.  ``I`` is the imaginary unit.

    Float literals are rejected; write rationals as quotients.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc.msg}") from None
    allowed = None if coords is None else set(coords)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ValueError(f"only integer literals allowed, got {node.value!r}")
            return const(node.value)
        if isinstance(node, ast.Name):
            if node.id == "I":
                return const(QI(0, 1))
            if allowed is not None and node.id not in allowed:
                raise ValueError(f"unknown symbol {node.id!r}")
            return sym(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
            if isinstance(node.op, ast.Pow):
                if not b.is_constant() or b.constant_value().im or b.constant_value().re.denominator != 1:
                    raise ValueError("exponent must be an integer constant")
                return a ** int(b.constant_value().re)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1:
            if node.func.id == "sin":
                return sin(walk(node.args[0]))
            if node.func.id == "cos":
                return cos(walk(node.args[0]))
        raise ValueError(f"unsupported syntax in {text!r}")

    return walk(tree)
