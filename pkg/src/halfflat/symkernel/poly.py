"""Sparse multivariate polynomials over Q on packed-integer monomials.

A polynomial is a plain ``dict`` mapping a packed monomial (see
:mod:`.atoms`) to a nonzero ``mpq``.  Integer comparison of packed monomials
is a lex monomial order (highest atom id most significant); it is used for
division and square roots.  Canonical *display* order is degree-lex over
atom sort keys, via :func:`mono_key`.
"""

from __future__ import annotations

import heapq
import threading
from functools import lru_cache
from math import gcd

from gmpy2 import is_square, isqrt, mpq

from halfflat.kernels import padd, pdiff, peval, pmul, pmulterm, pscale, psub  # noqa: F401
from halfflat.symkernel.atoms import FIELD_BITS, FIELD_MASK, atom_by_id, decode

ONE = mpq(1)

_guard_cache = [0, 0]


def _guard(bits: int) -> int:
    # bit 15 of every exponent field, wide enough to cover ``bits``
    if bits > _guard_cache[0]:
        n = bits // FIELD_BITS + 64
        g = 0
        for i in range(n):
            g |= 1 << (i * FIELD_BITS + FIELD_BITS - 1)
        _guard_cache[0] = n * FIELD_BITS
        _guard_cache[1] = g
    return _guard_cache[1]


def mono_divides(a: int, b: int) -> bool:
    """True when monomial ``a`` divides monomial ``b``."""
    d = b - a
    if d < 0:
        return False
    return not (d & _guard(d.bit_length()))


def mono_degree(m: int) -> int:
    return sum(e for _, e in decode(m))


@lru_cache(maxsize=1 << 16)
def mono_key(m: int):
    """Sort key of the canonical degree-lex order: smaller key = earlier term."""
    pairs = sorted(((a.sortkey, e) for a, e in decode(m)), key=lambda t: t[0])
    deg = sum(e for _, e in pairs)
    return (-deg, tuple((k, -e) for k, e in pairs))


def canonical_terms(p: dict) -> list:
    """Terms in canonical (descending degree-lex) order."""
    return sorted(p.items(), key=lambda t: mono_key(t[0]))


def const(c) -> dict:
    c = mpq(c)
    return {0: c} if c else {}


def is_const(p: dict) -> bool:
    return not p or (len(p) == 1 and 0 in p)


def degree(p: dict) -> int:
    return max((mono_degree(m) for m in p), default=-1)


def degree_in(p: dict, shift: int) -> int:
    return max(((m >> shift) & FIELD_MASK for m in p), default=-1)


def support_mask(p: dict) -> int:
    """Bitwise OR of all monomials; nonzero fields mark the atoms present."""
    acc = 0
    for m in p:
        acc |= m
    return acc


def atoms_of(p: dict) -> list:
    acc = support_mask(p)
    out = []
    i = 0
    while acc:
        if acc & FIELD_MASK:
            out.append(atom_by_id(i))
        acc >>= FIELD_BITS
        i += 1
    return out


def ppow(p: dict, n: int) -> dict:
    if n < 0:
        raise ValueError("negative power of a polynomial")
    result = {0: ONE}
    base = p
    while n:
        if n & 1:
            result = pmul(result, base)
        n >>= 1
        if n:
            base = pmul(base, base)
    return result


def pdivexact(a: dict, b: dict):
    """Quotient ``a / b`` when ``b`` divides ``a`` exactly, else ``None``."""
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    if not a:
        return {}
    lb = max(b)
    cb = b[lb]
    if len(b) == 1:
        inv = 1 / cb
        out = {}
        for m, c in a.items():
            if not mono_divides(lb, m):
                return None
            out[m - lb] = c * inv
        return out
    r = dict(a)
    heap = [-m for m in r]
    heapq.heapify(heap)
    q = {}
    rest = [(m, c) for m, c in b.items() if m != lb]
    while r:
        m = -heapq.heappop(heap)
        c = r.get(m)
        if c is None:
            continue
        if not mono_divides(lb, m):
            return None
        t = m - lb
        f = c / cb
        q[t] = f
        del r[m]
        for mb, c2 in rest:
            k = mb + t
            v = r.get(k)
            if v is None:
                r[k] = -f * c2
                heapq.heappush(heap, -k)
            else:
                v = v - f * c2
                if v:
                    r[k] = v
                else:
                    del r[k]
        # duplicated heap keys are skipped lazily
    return q


def content(p: dict) -> mpq:
    """Positive rational content: gcd of numerators over lcm of denominators."""
    g = 0
    l = 1
    for c in p.values():
        g = gcd(g, int(c.numerator))
        d = int(c.denominator)
        l = l * d // gcd(l, d)
    return mpq(g, l)


def leading_canonical(p: dict):
    return min(p.items(), key=lambda t: mono_key(t[0]))


def primitive(p: dict):
    """Split ``p = c * q`` with ``q`` primitive over Z and positive canonical lead."""
    c = content(p)
    if leading_canonical(p)[1] < 0:
        c = -c
    inv = 1 / c
    return c, {m: v * inv for m, v in p.items()}


# --------------------------------------------------------------- factors


class Factor:
    """Interned primitive irreducible polynomial used as a denominator key."""

    __slots__ = ("poly", "id", "mask", "_hash", "__weakref__")

    def __init__(self, poly: dict, ident: int):
        self.poly = poly
        self.id = ident
        self.mask = support_mask(poly)
        self._hash = hash(ident)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        from halfflat.symkernel.expr import render_poly

        return f"Factor({render_poly(self.poly)})"

    def depends_on(self, shift: int) -> bool:
        return bool((self.mask >> shift) & FIELD_MASK)


_factor_lock = threading.Lock()
_factors: dict = {}
_factor_list: list = []


def intern_factor(p: dict) -> Factor:
    """Intern a primitive polynomial (caller guarantees irreducibility)."""
    key = frozenset(p.items())
    f = _factors.get(key)
    if f is None:
        with _factor_lock:
            f = _factors.get(key)
            if f is None:
                f = Factor(p, len(_factor_list))
                _factor_list.append(f)
                _factors[key] = f
    return f


_factorization_cache: dict = {}


def factor_poly(p: dict):
    """Factor ``p`` as ``c * prod(f_i ** e_i)`` over Q with interned irreducibles.

    Monomials are split into atoms directly; anything else goes through
    sympy's multivariate factorizer (cached).
    """
    if not p:
        raise ZeroDivisionError("factorization of the zero polynomial")
    if len(p) == 1:
        (m, c), = p.items()
        return c, [(intern_factor({a.unit: ONE}), e) for a, e in decode(m)]
    key = frozenset(p.items())
    hit = _factorization_cache.get(key)
    if hit is not None:
        return hit
    # strip a common monomial first; sympy handles the rest
    g = None
    for m in p:
        g = m if g is None else _mono_gcd(g, m)
    out: list = []
    if g:
        out.extend((intern_factor({a.unit: ONE}), e) for a, e in decode(g))
        p = {m - g: c for m, c in p.items()}
    c, rest = _sympy_factor(p)
    result = (c, out + rest)
    _factorization_cache[key] = result
    return result


def _mono_gcd(a: int, b: int) -> int:
    fa = dict((x.id, e) for x, e in decode(a))
    out = 0
    for x, e in decode(b):
        k = fa.get(x.id)
        if k:
            out += min(k, e) << x.shift
    return out


def _sympy_factor(p: dict):
    import sympy

    atoms = atoms_of(p)
    if not atoms:
        (c,) = p.values()
        return c, []
    gens = [sympy.Symbol(f"a{a.id}") for a in atoms]
    terms = {}
    for m, c in p.items():
        fields = {x.id: e for x, e in decode(m)}
        terms[tuple(fields.get(a.id, 0) for a in atoms)] = sympy.Rational(int(c.numerator), int(c.denominator))
    sp = sympy.Poly.from_dict(terms, *gens, domain="QQ")
    c, parts = sp.factor_list()
    coeff = mpq(int(sympy.numer(c)), int(sympy.denom(c)))
    out = []
    for fp, e in parts:
        q = {}
        for exps, v in fp.as_dict().items():
            m = 0
            for a, k in zip(atoms, exps):
                if k:
                    m += k << a.shift
            q[m] = mpq(int(sympy.numer(v)), int(sympy.denom(v)))
        cc, q = primitive(q)
        coeff *= cc ** e
        out.append((intern_factor(q), e))
    return coeff, out


def to_sympy(p: dict):
    """Convert to a sympy expression with atoms rendered by name."""
    import sympy

    syms = {}
    total = sympy.Integer(0)
    for m, c in p.items():
        t = sympy.Rational(int(c.numerator), int(c.denominator))
        for a, e in decode(m):
            s = syms.get(a.id)
            if s is None:
                s = syms[a.id] = sympy.Symbol(a.name)
            t *= s ** e
        total += t
    return total


# ----------------------------------------------------------- square roots


def _odd_mask(bits: int) -> int:
    return _guard(bits) >> (FIELD_BITS - 1)


def rational_sqrt(c: mpq):
    """Exact square root of a nonnegative rational square, else ``None``."""
    if c < 0:
        return None
    n, d = int(c.numerator), int(c.denominator)
    if not (is_square(n) and is_square(d)):
        return None
    return mpq(int(isqrt(n)), int(isqrt(d)))


def psqrt(p: dict):
    """Polynomial ``r`` with ``r*r == p`` (canonical lead positive), else ``None``."""
    if not p:
        return {}
    lead = max(p)
    tail = min(p)
    for m in (lead, tail):
        if m & _odd_mask(m.bit_length() + 1):
            return None
    c0 = rational_sqrt(p[lead])
    if c0 is None:
        return None
    r_lead = lead >> 1
    r_tail = tail >> 1
    root = {r_lead: c0}
    rem = psub(p, pmul(root, root))
    two_c = 2 * c0
    while rem:
        m = max(rem)
        if not mono_divides(r_lead, m):
            return None
        t = m - r_lead
        if t < r_tail:
            return None
        coef = rem[m] / two_c
        term = {t: coef}
        # rem -= 2*root*term + term^2
        rem = psub(rem, pscale(pmul(root, term), mpq(2)))
        rem = psub(rem, {2 * t: coef * coef})
        root[t] = coef
    if leading_canonical(root)[1] < 0:
        root = {m: -c for m, c in root.items()}
    return root
