"""Dispersionless Lax pairs: lambda-dependent vector fields on jet space.

The bracket differentiates coefficients by total derivatives (they depend
on jets of the unknown), then restricts to solutions.  Identities are
required to hold identically in ``lam``: a restricted component is zero
iff its numerator, as a polynomial in ``lam`` over the jet ring, has every
coefficient zero, which is exactly zero-ness of the numerator polynomial.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations

from halfflat import jets
from halfflat.linalg import adjugate, det
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import ZERO, Expr, PoleError, as_expr, normalize, render
from halfflat.symkernel.parse import parse


class LaxError(ValueError):
    pass


@dataclass(frozen=True)
class LamVectorField:
    dim: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.dim:
            raise LaxError("vector field needs one coefficient per coordinate")

    def check_order(self, order: int = 2):
        for c in self.coeffs:
            for a in c.atoms():
                if a.kind == "u" and a.order > order:
                    raise LaxError(f"Lax coefficients may involve jets of order <= {order} only")

    @staticmethod
    def parse(dim: int, comps, params=()) -> "LamVectorField":
        return LamVectorField(dim, tuple(parse(c, dim=dim, params=params) if isinstance(c, str)
                                         else as_expr(c) for c in comps))

    def scaled(self, phi) -> "LamVectorField":
        phi = as_expr(phi)
        return LamVectorField(self.dim, tuple(normalize(phi * c) for c in self.coeffs))

    def plus(self, other: "LamVectorField", chi=1) -> "LamVectorField":
        chi = as_expr(chi)
        return LamVectorField(self.dim, tuple(normalize(a + chi * b)
                                              for a, b in zip(self.coeffs, other.coeffs)))


def commutator(X: LamVectorField, Y: LamVectorField, eq) -> LamVectorField:
    """``[X,Y]^k = sum_i X^i D_i Y^k - Y^i D_i X^k``, restricted to solutions."""
    eq = jets.ensure_solved(eq.specialized())
    d = X.dim
    if Y.dim != d or eq.dim != d:
        raise LaxError("dimension mismatch")
    r = jets.restrictor(eq)

    def D(e, i):
        return jets.total_derivative(e, i + 1, formal_args=eq.formal_args)

    out = []
    for k in range(d):
        acc = ZERO
        for i in range(d):
            if not X.coeffs[i].is_zero():
                acc = acc + X.coeffs[i] * D(Y.coeffs[k], i)
            if not Y.coeffs[i].is_zero():
                acc = acc - Y.coeffs[i] * D(X.coeffs[k], i)
        out.append(normalize(r(acc)))
    return LamVectorField(d, tuple(out))


@dataclass
class FrobeniusReport:
    verdict: str              # commute | span | fail
    bracket: LamVectorField
    witness: str | None = None
    null: "NullReport | None" = None

    @property
    def passed(self) -> bool:
        return self.verdict in ("commute", "span")

    def to_dict(self):
        d = {"frobenius": self.verdict, "bracket": [render(c) for c in self.bracket.coeffs]}
        if self.witness:
            d["witness"] = self.witness
        if self.null is not None:
            d["null_check"] = self.null.to_dict()
        return d


def _zero(e: Expr, mode: str, seed: int, samples: int) -> bool:
    if e.is_zero():
        return True
    if mode == "symbolic":
        return False
    # numerators are normalized; sampling only guards against unnormalized input
    for _, vals in jets.eval_on_samples([e], samples, seed):
        if vals[0]:
            return False
    return True


def _restricted(e, eq):
    return jets.restrict(e, eq)


def frobenius_check(X: LamVectorField, Y: LamVectorField, eq, mode: str = "symbolic",
                    seed: int = 0, samples: int = 8) -> FrobeniusReport:
    eq = jets.ensure_solved(eq.specialized())
    X.check_order()
    Y.check_order()
    d = X.dim
    minors2 = [normalize(X.coeffs[a] * Y.coeffs[b] - X.coeffs[b] * Y.coeffs[a])
               for a, b in combinations(range(d), 2)]
    if all(jets.restrict(m, eq).is_zero() for m in minors2):
        raise LaxError("X and Y are linearly dependent")
    Z = commutator(X, Y, eq)
    if all(_zero(c, mode, seed, samples) for c in Z.coeffs):
        return FrobeniusReport("commute", Z)
    for rows in combinations(range(d), 3):
        M = [[v.coeffs[c] for c in rows] for v in (X, Y, Z)]
        m = _restricted(det(M), eq)
        if not _zero(m, mode, seed, samples):
            cols = ",".join(str(c + 1) for c in rows)
            return FrobeniusReport("fail", Z, f"minor[{cols}] = {render(m)}")
    return FrobeniusReport("span", Z)


@dataclass
class NullReport:
    passed: bool
    values: dict
    criterion: str

    def to_dict(self):
        return {"passed": self.passed, "criterion": self.criterion,
                "values": {k: render(v) for k, v in self.values.items()}}


def null_check(X: LamVectorField, Y: LamVectorField, eq) -> NullReport:
    """Characteristic property of the plane spanned by ``X, Y``.

    In 4D the plane must be totally null: ``g(X,X) = g(X,Y) = g(Y,Y) = 0``.
    In 3D no 2-plane is totally null for a non-degenerate form, and the
    characteristic condition is that the plane is co-isotropic, i.e. the
    Gram determinant ``g(X,X) g(Y,Y) - g(X,Y)^2`` vanishes.  ``g`` is the
    adjugate of the characteristic quadric, which differs from the inverse
    quadric by a nonzero factor.
    """
    from halfflat.confgeom import characteristic_quadric

    eq = jets.ensure_solved(eq.specialized())
    Q = characteristic_quadric(eq).as_matrix()
    dq = jets.restrict(det(Q), eq)
    if dq.is_zero():
        raise LaxError("characteristic quadric is degenerate")
    g = [[jets.restrict(v, eq) for v in row] for row in adjugate(Q)]

    def form(V, W):
        acc = ZERO
        for a in range(eq.dim):
            for b in range(eq.dim):
                if not g[a][b].is_zero():
                    acc = acc + g[a][b] * V.coeffs[a] * W.coeffs[b]
        return jets.restrict(acc, eq)

    vals = {"g(X,X)": form(X, X), "g(X,Y)": form(X, Y), "g(Y,Y)": form(Y, Y)}
    if eq.dim == 4:
        return NullReport(all(v.is_zero() for v in vals.values()), vals, "totally null")
    gram = jets.restrict(vals["g(X,X)"] * vals["g(Y,Y)"] - vals["g(X,Y)"] ** 2, eq)
    vals["gram"] = gram
    return NullReport(gram.is_zero(), vals, "co-isotropic")


def lax_pair(eq):
    if eq.lax is None:
        raise LaxError(f"{eq.name} has no Lax pair")
    eqs = eq.specialized()
    X, Y = eqs.lax
    return LamVectorField(eq.dim, X), LamVectorField(eq.dim, Y)


def verify(eq, mode: str = "symbolic", seed: int = 0, samples: int = 8) -> FrobeniusReport:
    """Frobenius check and null check for the Lax pair stored with ``eq``."""
    X, Y = lax_pair(eq)
    rep = frobenius_check(X, Y, eq, mode, seed, samples)
    rep.null = null_check(X, Y, eq)
    return rep


def lam_samples_zero(e: Expr, values=(3, -7, 11), seed: int = 0) -> bool:
    """Re-check a restricted identity at a few fixed values of ``lam``."""
    from halfflat.symkernel.expr import substitute

    for v in values:
        ev = normalize(substitute(e, {A.lam(): Expr.const(v)}))
        if not ev.is_zero():
            return False
    return True
