"""Exact linear algebra over Q, Q(sqrt r) and polynomial rings.

Fraction-free (Bareiss) elimination is used wherever the entries live in a
ring; plain Gauss-Jordan where they live in a field.  Column order is the
caller's, pivots are chosen deterministically (first nonzero).
"""

from __future__ import annotations

from itertools import permutations

from gmpy2 import mpq

from halfflat.symkernel.expr import Expr
from halfflat.symkernel.poly import pdivexact


def exact_div(a, b):
    """``a / b`` where ``b`` is known to divide ``a``."""
    if isinstance(a, Expr) and isinstance(b, Expr) and not a.den and not b.den:
        q = pdivexact(a.num, b.num)
        if q is None:
            raise ArithmeticError("inexact division in fraction-free elimination")
        return Expr(q)
    return a / b


def bareiss(rows, exact=exact_div):
    """Fraction-free row echelon form; returns ``(echelon_rows, pivot_cols)``.

    ``rows`` is copied.  Works for any ring whose ``exact`` division is exact
    on Bareiss quotients (integers, polynomials, fields).
    """
    m, pivots, _ = _bareiss(rows, exact)
    return m, pivots


def _bareiss(rows, exact):
    m = [list(r) for r in rows]
    if not m:
        return m, [], 1
    ncols = len(m[0])
    prev = None
    r = 0
    sign = 1
    pivots = []
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
            sign = -sign
        p = m[r][c]
        top = m[r]
        for i in range(r + 1, len(m)):
            row = m[i]
            f = row[c]
            for j in range(c, ncols):
                v = p * row[j] - f * top[j]
                row[j] = v if prev is None else exact(v, prev)
        prev = p
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots, sign


def rank(rows, exact=exact_div) -> int:
    return len(bareiss(rows, exact)[1])


def det(mat):
    """Determinant: cofactor expansion up to 4x4 (division free), Bareiss above."""
    n = len(mat)
    if n == 0:
        return 1
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    if n <= 4:
        total = None
        for j in range(n):
            a = mat[0][j]
            if not a:
                continue
            minor = [row[:j] + row[j + 1:] for row in mat[1:]]
            t = a * det(minor)
            if j % 2:
                t = -t
            total = t if total is None else total + t
        return total if total is not None else mat[0][0] * 0
    m, piv, sign = _bareiss(mat, exact_div)
    if len(piv) < n:
        return mat[0][0] * 0
    return m[n - 1][n - 1] if sign > 0 else -m[n - 1][n - 1]


def adjugate(mat):
    """Classical adjoint: ``adj(M) @ M == det(M) * I`` (division free)."""
    n = len(mat)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(mat) if k != i]
            c = det(minor) if minor else 1
            out[j][i] = c if (i + j) % 2 == 0 else -c
    return out


def matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def field_rref(rows):
    """Reduced row echelon form over a field; returns ``(rref_rows, pivot_cols)``."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    r = 0
    pivots = []
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def field_rank(rows) -> int:
    return len(field_rref(rows)[1])


class Echelon:
    """Incremental row echelon basis over a field (rows added one at a time)."""

    def __init__(self, width: int):
        self.width = width
        self.rows: dict = {}          # pivot column -> row with 1 at the pivot

    def reduce(self, row):
        row = list(row)
        for c in sorted(self.rows):
            f = row[c]
            if f:
                b = self.rows[c]
                for k in range(c, self.width):
                    if b[k]:
                        row[k] = row[k] - f * b[k]
        return row

    def add(self, row) -> bool:
        """Add ``row``; return ``True`` if it was independent of the basis."""
        row = self.reduce(row)
        c = next((k for k, v in enumerate(row) if v), None)
        if c is None:
            return False
        inv = 1 / row[c]
        self.rows[c] = [v * inv for v in row]
        return True

    def contains(self, row) -> bool:
        return not any(self.reduce(row))

    @property
    def rank(self) -> int:
        return len(self.rows)


def solve_combination(basis_rows, target):
    """Coefficients ``c`` with ``sum c_i * basis_rows[i] == target`` or ``None``.

    Exact over any field.  Implemented by eliminating on the transposed
    system with an identity tag block.
    """
    nb = len(basis_rows)
    if nb == 0:
        return [] if not any(target) else None
    width = len(target)
    zero = target[0] * 0 if width else mpq(0)
    one = zero + 1
    aug = [list(row) + [one if k == i else zero for k in range(nb)] for i, row in enumerate(basis_rows)]
    ech, piv = field_rref(aug)
    residual = list(target)
    combo = [zero] * nb
    for row, c in zip(ech, piv):
        if c >= width:
            break
        f = residual[c]
        if f:
            residual = [a - f * b for a, b in zip(residual, row[:width])]
            combo = [a + f * b for a, b in zip(combo, row[width:])]
    if any(residual):
        return None
    return combo


def levi_civita(n: int) -> dict:
    """Nonzero entries of the Levi-Civita symbol with eps(0..n-1) = +1."""
    out = {}
    for p in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        out[p] = -1 if inv % 2 else 1
    return out
