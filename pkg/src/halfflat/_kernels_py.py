"""Pure-Python polynomial kernels (fallback for the compiled ``_kernels``).

Polynomials are plain dicts ``{packed_monomial: coefficient}`` with no zero
coefficients.  A packed monomial stores one 16-bit exponent per atom id, so
monomial multiplication is integer addition.
"""

from functools import lru_cache

FIELD_BITS = 16
FIELD_MASK = 0xFFFF


def padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    r = dict(a)
    get = r.get
    for m, c in b.items():
        v = get(m)
        if v is None:
            r[m] = c
        else:
            v = v + c
            if v:
                r[m] = v
            else:
                del r[m]
    return r


def psub(a, b):
    r = dict(a)
    get = r.get
    for m, c in b.items():
        v = get(m)
        if v is None:
            r[m] = -c
        else:
            v = v - c
            if v:
                r[m] = v
            else:
                del r[m]
    return r


def pscale(a, c):
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def pmulterm(a, mono, c):
    return {m + mono: v * c for m, v in a.items()}


def pmul(a, b):
    if len(a) > len(b):
        a, b = b, a
    if not a:
        return {}
    r = {}
    get = r.get
    bitems = list(b.items())
    for ma, ca in a.items():
        for mb, cb in bitems:
            m = ma + mb
            v = get(m)
            if v is None:
                r[m] = ca * cb
            else:
                v = v + ca * cb
                if v:
                    r[m] = v
                else:
                    del r[m]
    return r


def pdiff(a, shift):
    unit = 1 << shift
    r = {}
    for m, c in a.items():
        e = (m >> shift) & FIELD_MASK
        if e:
            r[m - unit] = c * e
    return r


@lru_cache(maxsize=1 << 18)
def _fields(m):
    out = []
    i = 0
    n = (m.bit_length() + 15) // 16
    b = m.to_bytes(n * 2, "little")
    for i in range(n):
        e = b[2 * i] | (b[2 * i + 1] << 8)
        if e:
            out.append((i, e))
    return tuple(out)


def peval(a, vals):
    """Evaluate at ``vals`` (sequence indexed by atom id; ``None`` = unbound)."""
    total = 0
    for m, c in a.items():
        t = c
        for i, e in _fields(m):
            v = vals[i]
            if v is None:
                raise KeyError(i)
            t = t * (v if e == 1 else v ** e)
        total = total + t
    return total
