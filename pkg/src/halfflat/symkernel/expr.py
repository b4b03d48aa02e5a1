"""Exact rational-function expressions over interned atoms.

An :class:`Expr` is ``num / prod(f_i ** e_i)``: a sparse polynomial numerator
with rational coefficients over a denominator kept as a product of interned
primitive irreducible factors.  Keeping the denominator factored makes the
lcm in addition trivial, so no polynomial gcd is ever needed in the hot
paths; :func:`normalize` cancels common factors by exact trial division and
yields the canonical form.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from gmpy2 import mpq

from halfflat.symkernel import atoms as _atoms
from halfflat.symkernel.atoms import MAX_EXP, Atom, decode
from halfflat.symkernel.poly import (
    ONE,
    Factor,
    canonical_terms,
    factor_poly,
    padd,
    pdiff,
    pdivexact,
    peval,
    pmul,
    pmulterm,
    ppow,
    pscale,
    psub,
    support_mask,
)


class PoleError(ZeroDivisionError):
    """Raised when a denominator vanishes at an evaluation point."""


class UnboundAtomError(KeyError):
    pass


_EMPTY: tuple = ()


@lru_cache(maxsize=1 << 14)
def _factor_power(f: Factor, e: int) -> dict:
    return ppow(f.poly, e)


def _den_poly(den) -> dict:
    p = {0: ONE}
    for f, e in den:
        p = pmul(p, _factor_power(f, e))
    return p


def _merge_den(a, b):
    """Sum of exponents (product of denominators)."""
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for f, e in b:
        d[f] = d.get(f, 0) + e
    return tuple(sorted(d.items(), key=lambda t: t[0].id))


def _to_mpq(c) -> mpq:
    if isinstance(c, Fraction):
        return mpq(c.numerator, c.denominator)
    return mpq(c)


class Expr:
    """Immutable exact rational function (see module docstring)."""

    __slots__ = ("num", "den", "_h")

    def __init__(self, num: dict, den: tuple = _EMPTY):
        self.num = num
        self.den = den if num else _EMPTY
        self._h = None

    # ---------------------------------------------------------- builders
    @staticmethod
    def const(c) -> "Expr":
        c = _to_mpq(c)
        return Expr({0: c} if c else {})

    @staticmethod
    def atom(a: Atom) -> "Expr":
        return Expr({a.unit: ONE})

    # ------------------------------------------------------------- views
    def is_zero(self) -> bool:
        """Exact test for the root-free case; see :func:`is_zero` for roots."""
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    @property
    def is_poly(self) -> bool:
        return not self.den

    def is_constant(self) -> bool:
        return not self.den and (not self.num or (len(self.num) == 1 and 0 in self.num))

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("expression is not constant")
        c = self.num.get(0, mpq(0))
        return Fraction(int(c.numerator), int(c.denominator))

    def atoms(self) -> set:
        mask = support_mask(self.num)
        for f, _ in self.den:
            mask |= f.mask
        return set(_atoms.atom_mask(mask))

    def depends_on(self, a: Atom) -> bool:
        s = a.shift
        if (support_mask(self.num) >> s) & 0xFFFF:
            return True
        return any(f.depends_on(s) for f, _ in self.den)

    def degree(self) -> int:
        """Total degree of the numerator."""
        from halfflat.symkernel.poly import degree

        return degree(self.num)

    def den_degree(self) -> int:
        from halfflat.symkernel.poly import degree

        return sum(degree(f.poly) * e for f, e in self.den)

    def n_terms(self) -> int:
        return len(self.num)

    # -------------------------------------------------------- arithmetic
    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        a, b = self, o
        if not a.num:
            return b
        if not b.num:
            return a
        if a.den == b.den:
            return Expr(padd(a.num, b.num), a.den)
        da = dict(a.den)
        db = dict(b.den)
        lcm = dict(da)
        for f, e in db.items():
            if e > lcm.get(f, 0):
                lcm[f] = e
        ca = tuple((f, e - da.get(f, 0)) for f, e in lcm.items() if e > da.get(f, 0))
        cb = tuple((f, e - db.get(f, 0)) for f, e in lcm.items() if e > db.get(f, 0))
        na = pmul(a.num, _den_poly(ca)) if ca else a.num
        nb = pmul(b.num, _den_poly(cb)) if cb else b.num
        den = tuple(sorted(lcm.items(), key=lambda t: t[0].id))
        return Expr(padd(na, nb), den)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self.num.items()}, self.den)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return Expr(psub(self.num, o.num), self.den)
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) or type(other) is type(ONE):
            c = _to_mpq(other)
            return Expr(pscale(self.num, c), self.den)
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if not self.num or not o.num:
            return ZERO
        return Expr(pmul(self.num, o.num), _merge_den(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            raise ZeroDivisionError("division by an identically zero expression")
        if o.is_constant():
            return Expr(pscale(self.num, 1 / o.num[0]), self.den)
        num = pmul(self.num, _den_poly(o.den)) if o.den else self.num
        c, facs = factor_poly(o.num)
        num = pscale(num, 1 / c)
        den = _merge_den(self.den, tuple(sorted(facs, key=lambda t: t[0].id)))
        return _cancel(Expr(num, den))

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return ONE_EXPR / (self ** (-n))
        if n == 0:
            return ONE_EXPR
        if n >= MAX_EXP:
            raise OverflowError("exponent too large")
        return Expr(ppow(self.num, n), tuple((f, e * n) for f, e in self.den))

    # ----------------------------------------------------------- equality
    def __eq__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.den == o.den and self.num == o.num

    def __hash__(self):
        if self._h is None:
            self._h = hash((frozenset(self.num.items()), self.den))
        return self._h

    def __repr__(self):
        return f"Expr({render(self)})"

    def __str__(self):
        return render(self)


ZERO = Expr({})
ONE_EXPR = Expr({0: ONE})


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)) or type(x) is type(ONE):
        return Expr.const(x)
    if isinstance(x, Atom):
        return Expr.atom(x)
    return NotImplemented


def as_expr(x) -> Expr:
    e = _coerce(x)
    if e is NotImplemented:
        raise TypeError(f"cannot convert {type(x).__name__} to Expr")
    return e


def _cancel(e: Expr) -> Expr:
    if not e.den or not e.num:
        return e
    num = e.num
    den = dict(e.den)
    for f in list(den):
        while den[f]:
            q = pdivexact(num, f.poly)
            if q is None:
                break
            num = q
            den[f] -= 1
        if not den[f]:
            del den[f]
    return Expr(num, tuple(sorted(den.items(), key=lambda t: t[0].id)))


# ------------------------------------------------------------ calculus


def diff(e, a: Atom, formal_args=None) -> Expr:
    """Partial derivative w.r.t. one atom.

    Formal symbols ``df[S]`` are treated as functions of their potential
    arguments: differentiating by a jet or variable ``a`` produces
    ``df[S + {a}]`` (the chain-rule partial).  When ``formal_args`` is
    given, only atoms in it count as arguments of the formal function.
    """
    e = as_expr(e)
    if a.kind not in ("x", "u", "lam", "param"):
        raise ValueError(f"cannot differentiate with respect to {a}")
    out = _diff_plain(e, a)
    if a.kind in ("u", "x") and (formal_args is None or a in formal_args):
        for b in e.atoms():
            if b.kind == "df":
                inner = _diff_plain(e, b)
                if inner.num:
                    out = out + inner * Expr.atom(_atoms.df(b.data + (a,)))
    return out


def _diff_plain(e: Expr, a: Atom) -> Expr:
    s = a.shift
    dn = pdiff(e.num, s)
    dep = [(f, k) for f, k in e.den if f.depends_on(s)]
    if not dep:
        return Expr(dn, e.den)
    # d(N / prod f^k) = (N' * P - N * sum k f' P/f) / (D * P), P = prod of dependent f
    P = {0: ONE}
    for f, _ in dep:
        P = pmul(P, f.poly)
    acc = pmul(dn, P)
    for f, k in dep:
        others = {0: ONE}
        for g, _ in dep:
            if g is not f:
                others = pmul(others, g.poly)
        term = pmul(pmul(e.num, pdiff(f.poly, s)), others)
        acc = psub(acc, pscale(term, mpq(k)))
    den = _merge_den(e.den, tuple(sorted(((f, 1) for f, _ in dep), key=lambda t: t[0].id)))
    return Expr(acc, den)


def substitute(e, bindings: Mapping) -> Expr:
    """Simultaneous substitution ``atom -> Expr`` (keys may be Atom or names)."""
    e = as_expr(e)
    if not bindings:
        return e
    b = {}
    for k, v in bindings.items():
        if isinstance(k, str):
            from halfflat.symkernel.parse import parse_atom

            k = parse_atom(k)
        b[k.id] = as_expr(v)
    if not e.num:
        return e
    num = _subst_poly(e.num, b)
    if not e.den:
        return num
    out = num
    for f, k in e.den:
        if any(((f.mask >> (i * 16)) & 0xFFFF) for i in b):
            fv = _subst_poly(f.poly, b)
            if not fv.num:
                raise PoleError(f"substitution makes denominator factor {render_poly(f.poly)} vanish")
            out = out / (fv ** k)
        else:
            out = out * Expr({0: ONE}, ((f, k),))
    return out


def _subst_poly(p: dict, b: dict) -> Expr:
    bound_mask = 0
    for i in b:
        bound_mask |= 0xFFFF << (i * 16)
    groups: dict = {}
    for m, c in p.items():
        bm = m & bound_mask
        g = groups.get(bm)
        if g is None:
            groups[bm] = {m - bm: c}
        else:
            g[m - bm] = c
    if len(groups) == 1 and 0 in groups:
        return Expr(dict(p))
    powcache: dict = {}

    def power(i, k):
        key = (i, k)
        v = powcache.get(key)
        if v is None:
            v = powcache[key] = b[i] ** k
        return v

    out = ZERO
    # collect polynomial-valued groups cheaply, rational ones via Expr
    poly_acc: dict = {}
    for bm, rest in groups.items():
        val = ONE_EXPR
        for a, k in decode(bm):
            val = val * power(a.id, k)
        if not val.den:
            poly_acc = padd(poly_acc, pmul(rest, val.num))
        else:
            out = out + Expr(pmul(rest, val.num), val.den)
    if poly_acc:
        out = out + Expr(poly_acc)
    return out


# ---------------------------------------------------------- evaluation


class Point:
    """Exact rational assignment to atoms with per-point factor caching."""

    __slots__ = ("vals", "_fcache", "assignment")

    def __init__(self, assignment: Mapping):
        self.assignment = {}
        n = _atoms.n_atoms()
        self.vals = [None] * n
        for k, v in assignment.items():
            if isinstance(k, str):
                from halfflat.symkernel.parse import parse_atom

                k = parse_atom(k)
            q = _to_mpq(v)
            self.assignment[k] = q
            self.vals[k.id] = q
        self._fcache: dict = {}

    def _ensure(self):
        n = _atoms.n_atoms()
        if len(self.vals) < n:
            self.vals.extend([None] * (n - len(self.vals)))

    def poly(self, p: dict):
        self._ensure()
        try:
            return peval(p, self.vals)
        except KeyError as exc:
            raise UnboundAtomError(f"unbound atom {_atoms.atom_by_id(exc.args[0]).name}") from None

    def factor(self, f: Factor):
        v = self._fcache.get(f.id)
        if v is None:
            v = self._fcache[f.id] = self.poly(f.poly)
        return v

    def __call__(self, e) -> mpq:
        e = as_expr(e)
        n = self.poly(e.num)
        if not e.den:
            return n
        d = mpq(1)
        for f, k in e.den:
            fv = self.factor(f)
            if not fv:
                raise PoleError(f"pole: {render_poly(f.poly)} vanishes at the point")
            d *= fv ** k
        return n / d


def eval_rational(e, point) -> Fraction:
    """Exact value of ``e`` at ``point`` (a :class:`Point` or a mapping)."""
    p = point if isinstance(point, Point) else Point(point)
    v = p(e)
    return Fraction(int(v.numerator), int(v.denominator))


# ------------------------------------------------------- normalization


def normalize(e, radicand=None) -> Expr:
    """Canonical form: common factors cancelled, content in the numerator.

    With ``radicand`` r registered for the root atom ``s``, the result has
    the shape ``(a + b*s)/D`` with ``a, b, D`` free of ``s``.
    """
    e = as_expr(e)
    if radicand is not None:
        e = _reduce_root(e, as_expr(radicand))
    return _cancel(e)


def _reduce_root(e: Expr, r: Expr) -> Expr:
    s_atom = _atoms.root()
    if r.depends_on(s_atom):
        raise ValueError("nested radicals are not supported")
    if not e.depends_on(s_atom):
        return e
    sden = tuple((f, k) for f, k in e.den if f.depends_on(s_atom.shift))
    if sden:
        rest = tuple((f, k) for f, k in e.den if not f.depends_on(s_atom.shift))
        D = _fold_root(Expr(_den_poly(sden)), r)
        a, b = split_root(D)
        conj = a - b * Expr.atom(s_atom)
        newden = a * a - b * b * r
        if newden.is_zero():
            raise ZeroDivisionError("denominator vanishes under the radicand relation")
        return _fold_root(Expr(e.num, rest) * conj, r) / newden
    return _fold_root(e, r)


def _fold_root(e: Expr, r: Expr) -> Expr:
    s_atom = _atoms.root()
    s = s_atom.shift
    groups: dict = {}
    for m, c in e.num.items():
        k = (m >> s) & 0xFFFF
        groups.setdefault(k, {})[m - (k << s)] = c
    out = ZERO
    for k, p in groups.items():
        term = Expr(p) * (r ** (k // 2))
        if k % 2:
            term = term * Expr.atom(s_atom)
        out = out + term
    return out * Expr({0: ONE}, e.den)


def split_root(e: Expr):
    """Return ``(a, b)`` with ``e == a + b*s`` for a root-reduced ``e``."""
    s_atom = _atoms.root()
    s = s_atom.shift
    a, b = {}, {}
    for m, c in e.num.items():
        k = (m >> s) & 0xFFFF
        if k == 0:
            a[m] = c
        elif k == 1:
            b[m - s_atom.unit] = c
        else:
            raise ValueError("expression not reduced modulo the radicand")
    if any(f.depends_on(s) for f, _ in e.den):
        raise ValueError("root in denominator; normalize with the radicand first")
    return Expr(a, e.den), Expr(b, e.den)


def is_zero(e, radicand=None) -> bool:
    e = as_expr(e)
    if radicand is None:
        return not e.num
    return not normalize(e, radicand).num


# ------------------------------------------------------------ rendering


def _fmt_coeff(c) -> str:
    n, d = int(c.numerator), int(c.denominator)
    return str(n) if d == 1 else f"{n}/{d}"


def _fmt_mono(m: int) -> str:
    parts = []
    for a, e in sorted(decode(m), key=lambda t: t[0].sortkey):
        parts.append(a.name if e == 1 else f"{a.name}^{e}")
    return "*".join(parts)


def render_poly(p: dict) -> str:
    if not p:
        return "0"
    out = []
    for i, (m, c) in enumerate(canonical_terms(p)):
        mono = _fmt_mono(m)
        neg = c < 0
        ac = -c if neg else c
        if not mono:
            body = _fmt_coeff(ac)
        elif ac == 1:
            body = mono
        else:
            body = f"{_fmt_coeff(ac)}*{mono}"
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def render(e) -> str:
    """Deterministic, re-parseable text form of the stored representation."""
    e = as_expr(e)
    num = render_poly(e.num)
    if not e.den:
        return num
    dens = []
    for f, k in sorted(e.den, key=lambda t: render_poly(t[0].poly)):
        body = render_poly(f.poly)
        if len(f.poly) > 1:
            body = f"({body})"
        dens.append(body if k == 1 else f"{body}^{k}")
    return f"({num})/({'*'.join(dens)})"
