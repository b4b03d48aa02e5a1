"""Second-order constraints on a formal right-hand side from ``W- = 0``.

For ``u[1,1] = f`` with ``f`` a formal function of the nine remaining
second-order jets, the quadric 2-jet is computed with the formal chain
rule and restricted to solutions.  The first derivatives ``df[A]`` are then
frozen to constants.  Freezing is an evaluation homomorphism and the rest
of the curvature computation is algebraic, so it commutes with the Weyl
and Hodge steps; with the frozen jet the quadric is constant.  The
coefficients of the free fourth-order jets in ``W-`` are linear forms in
the 45 second derivatives ``df[A,B]``.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from gmpy2 import mpq

from halfflat import jets
from halfflat.confgeom import _pipeline, independent_mixed, quadric_jet
from halfflat.scalars import QuadNumber
from halfflat.linalg import Echelon, det, field_rank, solve_combination
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import Expr, normalize, render, split_root, substitute
from halfflat.symkernel.poly import rational_sqrt

JET_ARGS = tuple(A.jet(a, b) for a, b in
                 ((1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4), (3, 3), (3, 4), (4, 4)))
EXTRA_ARGS = tuple([A.var(i) for i in range(1, 5)] + [A.jet()] + [A.jet(i) for i in range(1, 5)])
DEFAULT_JET = {A.jet(1, 4): Fraction(1), A.jet(2, 3): Fraction(1)}


class DegenerateJetError(ValueError):
    pass


class ConstraintError(ValueError):
    pass


def second_derivative_symbols() -> list:
    """The 45 symbols ``df[A,B]`` in canonical order (the column order)."""
    syms = {A.df((a, b)) for a, b in combinations_with_replacement(JET_ARGS, 2)}
    return sorted(syms, key=lambda s: s.sortkey)


def formal_equation(extra_args: bool = False) -> jets.Equation:
    f = Expr.atom(A.df(()))
    args = JET_ARGS + (EXTRA_ARGS if extra_args else ())
    return jets.Equation("formal_evolutionary", 4, Expr.atom(A.jet(1, 1)) - f,
                         A.jet(1, 1), f, formal_args=args)


def normalize_jet(frozen) -> dict:
    """Frozen 1-jet as ``{u-atom: Fraction}`` over all nine arguments."""
    out = {a: Fraction(0) for a in JET_ARGS}
    for k, v in dict(frozen).items():
        if isinstance(k, str):
            from halfflat.symkernel.parse import parse_atom

            k = parse_atom(k)
        if k not in out:
            raise ConstraintError(f"{k} is not an argument of the formal right-hand side")
        out[k] = Fraction(v)
    return out


def random_jet(seed: int, lo: int = -9, hi: int = 9) -> dict:
    rng = random.Random(seed)
    return {a: Fraction(rng.randint(lo, hi)) for a in JET_ARGS}


@dataclass
class ConstraintSystem:
    frozen: dict
    columns: list
    rows: list                  # dense rows of mpq, one per extracted coefficient
    labels: list                # (component, fourth-order jet, root part)
    rank: int
    part: str = "W-"
    split_rank: int | None = None
    extra_args: bool = False
    extra_symbols: list = field(default_factory=list)
    root: str = "rational"
    radicand: object = None     # mpq when the rows live over Q(s), s^2 = radicand
    elapsed: float = 0.0
    _echelon: object = field(default=None, repr=False, compare=False)

    def expressions(self) -> list:
        def q(c):
            return Expr.const(Fraction(int(c.numerator), int(c.denominator)))

        out = []
        root = Expr.atom(A.root())
        for row in self.rows:
            e = Expr({})
            for c, s in zip(row, self.columns):
                if not c:
                    continue
                if isinstance(c, QuadNumber):
                    e = e + Expr.atom(s) * (q(c.a) + q(c.b) * root)
                else:
                    e = e + Expr.atom(s) * q(c)
            out.append(normalize(e))
        return out

    def lift(self, row):
        """A rational row in the realified coordinates of :meth:`basis`."""
        if self.radicand is None:
            return list(row)
        return list(row) + [mpq(0)] * len(row)

    @property
    def field_degree(self) -> int:
        return 1 if self.radicand is None else 2

    def echelon(self) -> Echelon:
        if self._echelon is None:
            width = len(self.columns) * self.field_degree
            ech = Echelon(width)
            for row in self.rows:
                for r in realify(row, self.radicand):
                    ech.add(r)
            self._echelon = ech
        return self._echelon

    def basis(self) -> list:
        """Echelon basis of the (realified) row space, in pivot order."""
        ech = self.echelon()
        return [ech.rows[c] for c in sorted(ech.rows)]

    def to_dict(self):
        return {
            "frozen_1jet": {a.name: str(v) for a, v in self.frozen.items() if v},
            "part": self.part,
            "rows": len(self.rows),
            "rank": self.rank,
            "unknowns": len(self.columns),
            "split_rank": self.split_rank,
            "extra_args": self.extra_args,
            "extra_symbols": [a.name for a in self.extra_symbols],
            "root": self.root,
        }


def _split_terms(e: Expr):
    """Group the terms of a polynomial ``e`` by jet monomials of order >= 3.

    Returns ``{(fourth_or_None, rest_monomial): coefficient_poly}`` where the
    coefficient collects every non-jet factor.
    """
    if e.den:
        raise ConstraintError("expected a polynomial Weyl component at a frozen 1-jet")
    groups: dict = {}
    for m, c in e.num.items():
        key_atoms = []
        coef_m = 0
        for a, k in A.decode(m):
            if a.kind == "u" and a.order >= 3:
                key_atoms.append((a, k))
            else:
                coef_m += a.unit * k
        fourth = [(a, k) for a, k in key_atoms if a.order == 4]
        rest = tuple((a.id, k) for a, k in key_atoms if a.order != 4)
        if len(fourth) > 1 or (fourth and fourth[0][1] > 1):
            raise ConstraintError("fourth-order jets enter nonlinearly")
        key = (fourth[0][0] if fourth else None, rest)
        g = groups.setdefault(key, {})
        g[coef_m] = g.get(coef_m, 0) + c
    return groups


def _fourth_part(e: Expr) -> Expr:
    keep = {}
    for m, c in e.num.items():
        if any(a.kind == "u" and a.order == 4 for a, _ in A.decode(m)):
            keep[m] = c
    return Expr(keep, e.den)


def _linear_row(coef: dict, col_index: dict, allow_extra: bool):
    """Dense row if ``coef`` is linear homogeneous in the ``df[A,B]`` symbols, else ``None``.

    With ``allow_extra``, coefficients may contain further non-jet symbols;
    those are returned separately for specialization.
    """
    row: dict = {}
    extra = set()
    for m, c in coef.items():
        if not c:
            continue
        found = None
        for a, k in A.decode(m):
            if a in col_index and k == 1 and found is None:
                found = a
            elif a in col_index:
                return None
            else:
                extra.add(a)
        if found is None:
            return None
        rest = m - found.unit
        row.setdefault(found, {})
        row[found][rest] = row[found].get(rest, 0) + c
    if extra and not allow_extra:
        return None
    return row, extra


def derive_constraints(frozen=None, extra_args: bool = False, part: str = "W-", seed: int = 0,
                       progress=None, completeness: bool = False) -> ConstraintSystem:
    """Linear system in ``df[A,B]`` from the fourth-order coefficients of ``W-`` (or ``W+``)."""
    t0 = time.perf_counter()
    log = progress or (lambda msg: None)
    frozen = normalize_jet(DEFAULT_JET if frozen is None else frozen)
    if part not in ("W-", "W+"):
        raise ConstraintError("part must be W- or W+")
    eq = formal_equation(extra_args)
    log("quadric 2-jet with formal chain rule")
    qj = quadric_jet(eq)
    bind = {A.df((a,)): Expr.const(v) for a, v in frozen.items()}

    def fr(v):
        return normalize(substitute(v, bind))

    Q = [[fr(v) for v in row] for row in qj.Q]
    dq = normalize(det(Q))
    if dq.is_zero() or dq.atoms():
        raise DegenerateJetError("the frozen 1-jet makes the characteristic quadric degenerate")
    log("freezing the 1-jet")
    ddQ = {k: [[fr(v) for v in row] for row in M] for k, M in qj.ddQ.items()}
    r = rational_sqrt(mpq(dq.constant_value()))
    if r is not None:
        radicand = None
        sq = Expr.const(Fraction(1) / Fraction(int(r.numerator), int(r.denominator)))
        root = "rational"
    else:
        radicand = dq
        sq = normalize(Expr.atom(A.root()) / dq, dq)
        root = f"s^2 = {render(dq)}"

    def norm(v):
        return normalize(v, radicand) if radicand is not None else normalize(v)

    cols = second_derivative_symbols()
    col_index = {s: i for i, s in enumerate(cols)}
    extra_syms: set = set()

    def harvest(T, want_fourth):
        # (component, jet, rest) -> {"1": linear form, "s": linear form}
        found: dict = {}
        for idx in independent_mixed():
            v = T[idx]
            if v.is_zero():
                continue
            pieces = split_root(v) if radicand is not None else (v, Expr({}))
            for tag, piece in zip(("1", "s"), pieces):
                if piece.is_zero():
                    continue
                groups = _split_terms(piece)
                for (fourth, rest) in sorted(groups, key=lambda k: (k[0].sortkey if k[0] else (), k[1])):
                    coef = groups[(fourth, rest)]
                    lin = _linear_row(coef, col_index, extra_args)
                    if want_fourth and fourth is not None:
                        if rest:
                            raise ConstraintError("fourth-order coefficient involves third-order jets")
                        if lin is None:
                            raise ConstraintError(f"coefficient of {fourth.name} is not linear in df[A,B]")
                        found.setdefault((_label(idx), fourth.name), {})[tag] = lin
                    elif not want_fourth and fourth is None and lin is not None:
                        found.setdefault((_label(idx), rest), {})[tag] = lin
        return found

    # With Q constant, W is linear in ddQ plus quadratic in dQ, and only the
    # linear part can carry fourth-order jets: dQ is dropped and ddQ cut to
    # its fourth-order terms, which leaves the extracted coefficients exact.
    log("curvature and Hodge split on the fourth-order part")
    dQ0 = [[[Expr({})] * 4 for _ in range(4)] for _ in range(4)]
    dd4 = {k: [[_fourth_part(v) for v in row] for row in M] for k, M in ddQ.items()}
    _, _, _, Wp, Wn = _pipeline(Q, dQ0, dd4, sq, norm)
    log("extracting fourth-order coefficients")
    got = harvest(Wn if part == "W-" else Wp, True)
    split = {}
    if completeness:
        log("full curvature for the third-order splits")
        dQ = [[[fr(v) for v in row] for row in M] for M in qj.dQ]
        _, _, _, Wp, Wn = _pipeline(Q, dQ, ddQ, sq, norm)
        split = harvest(Wn if part == "W-" else Wp, False)
    for pair in list(got.values()) + list(split.values()):
        for lin in pair.values():
            extra_syms |= lin[1]
    # coefficients involving extra symbols are specialized at random rationals
    spec = {}
    rng = random.Random(seed)
    for a in sorted(extra_syms, key=lambda a: a.sortkey):
        spec[a] = mpq(rng.randint(-10 ** 6, 10 ** 6))
    rad = None if radicand is None else mpq(radicand.constant_value())

    def dense_part(lin):
        row = [mpq(0)] * len(cols)
        if lin is None:
            return row
        for s, poly in lin[0].items():
            acc = mpq(0)
            for m, c in poly.items():
                term = mpq(c)
                for a, k in A.decode(m):
                    term *= spec[a] ** k
                acc += term
            row[col_index[s]] = acc
        return row

    def dense(pair):
        a_ = dense_part(pair.get("1"))
        if rad is None:
            return a_
        # one row over Q(s): the unknowns df[A,B] are not rational, so the
        # rational and root parts must not be split into separate equations
        b_ = dense_part(pair.get("s"))
        return [QuadNumber(x, y, rad) for x, y in zip(a_, b_)]

    labels, rows, seen = [], [], set()
    for key, pair in got.items():
        row = dense(pair)
        lead = next((v for v in row if v), None)
        if lead is None:
            continue
        t = tuple(v / lead for v in row)
        if t in seen:
            continue
        seen.add(t)
        labels.append(key)
        rows.append(row)
    log(f"eliminating {len(rows)} rows in {len(cols)} unknowns")
    system = ConstraintSystem(frozen, cols, rows, labels, 0, part, None, extra_args,
                              sorted(extra_syms, key=lambda a: a.sortkey), root, rad)
    ech = system.echelon()
    system.rank = ech.rank // system.field_degree
    if completeness:
        for pair in split.values():
            for r_ in realify(dense(pair), rad):
                ech.add(r_)
        system.split_rank = ech.rank // system.field_degree
        system._echelon = None
    system.elapsed = time.perf_counter() - t0
    return system


def realify(row, rad):
    """Rational rows spanning ``Q(s) * row`` (``s^2 = rad``); the row itself if ``rad`` is None.

    ``a + s b`` maps to ``(a, b)`` and ``s (a + s b)`` to ``(rad b, a)``, so
    the Q-rank of the image is twice the Q(s)-rank.
    """
    if rad is None:
        return [row]
    a = [v.a for v in row]
    b = [v.b for v in row]
    return [a + b, [rad * y for y in b] + a]


def _label(idx) -> str:
    i, j, k, l = (t + 1 for t in idx)
    return f"{i}{j}{k}{l}"


# ------------------------------------------------------- containment


@dataclass
class Containment:
    relation: str
    contained: bool
    certificate: dict | None


@dataclass
class ContainmentReport:
    frozen: dict
    results: list
    system_rank: int
    ma_rank: int

    @property
    def all_contained(self) -> bool:
        return all(r.contained for r in self.results)

    @property
    def complement(self) -> int:
        return self.system_rank - self.ma_rank

    def to_dict(self):
        return {
            "all_contained": self.all_contained,
            "relations": len(self.results),
            "contained": sum(r.contained for r in self.results),
            "system_rank": self.system_rank,
            "ma_rank": self.ma_rank,
            "complement": self.complement,
            "not_contained": [r.relation for r in self.results if not r.contained],
        }


def linearized_relations(frozen) -> list:
    """The 25 Monge-Ampere relations at a frozen 1-jet, as dense rows in ``df[A,B]``."""
    from halfflat.mongeampere import generate_relations

    frozen = normalize_jet(frozen)
    f = Expr.atom(A.df(()))
    bind = {A.df((a,)): Expr.const(v) for a, v in frozen.items()}
    cols = second_derivative_symbols()
    col_index = {s: i for i, s in enumerate(cols)}
    out = []
    for lab, rel in generate_relations(f):
        e = normalize(substitute(rel, bind))
        row = [mpq(0)] * len(cols)
        for m, c in e.num.items():
            dec = A.decode(m)
            if len(dec) != 1 or dec[0][1] != 1 or dec[0][0] not in col_index:
                raise ConstraintError(f"{lab} is not linear in df[A,B] at this 1-jet")
            row[col_index[dec[0][0]]] += mpq(c)
        out.append((lab, row))
    return out


def contains_ma(system: ConstraintSystem, frozen=None) -> ContainmentReport:
    frozen = normalize_jet(system.frozen if frozen is None else frozen)
    if frozen != system.frozen:
        raise ConstraintError("the system was derived at a different frozen 1-jet")
    basis = system.basis()
    rels = linearized_relations(frozen)
    results = []
    for lab, row in rels:
        c = solve_combination(basis, system.lift(row))
        cert = None
        if c is not None:
            cert = {f"b{i}": str(v) for i, v in enumerate(c) if v}
        results.append(Containment(lab, c is not None, cert))
    return ContainmentReport(frozen, results, system.rank, field_rank([r for _, r in rels]))


def read_jet(path) -> dict:
    """Frozen 1-jet file: lines ``u[a,b] = <rational>``; missing entries are 0."""
    from pathlib import Path

    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConstraintError(f"{path}:{n}: expected 'u[a,b] = value'")
        k, v = (t.strip() for t in s.split("=", 1))
        try:
            out[k] = Fraction(v)
        except ValueError:
            raise ConstraintError(f"{path}:{n}: value must be rational") from None
    return normalize_jet(out)
