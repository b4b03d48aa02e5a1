"""Jet-space bookkeeping.

Total derivatives, equation records, restriction to the solution manifold
of a solved equation ``u[pivot] = rhs``, and the rank of the characteristic
quadric.  The ``.eq`` text format lives here as well.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from gmpy2 import mpq

from halfflat.kernels import padd, pdiff, pmul, pmulterm, pscale, psub
from halfflat.linalg import field_rank
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import (
    ONE_EXPR,
    ZERO,
    Expr,
    Point,
    PoleError,
    _merge_den,
    as_expr,
    diff,
    normalize,
    render,
    substitute,
)
from halfflat.symkernel.parse import parse
from halfflat.symkernel.poly import ONE, atoms_of, support_mask

MAX_ORDER = 4
SAMPLE_RANGE = 10 ** 6


class JetOrderError(ValueError):
    """A total derivative would exceed the configured jet order."""


class RestrictionError(ValueError):
    """The solved form cannot be used to eliminate pivot-rooted jets."""


class EquationError(ValueError):
    pass


# ------------------------------------------------------------ equations


@dataclass(frozen=True)
class Equation:
    name: str
    dim: int
    F: Expr
    pivot: A.Atom | None = None
    rhs: Expr | None = None
    sqrtdet: Expr | None = None
    # name -> Fraction, or None for a parameter kept symbolic
    params: dict = field(default_factory=dict, compare=False)
    lax: tuple | None = None
    formal_args: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 1 <= self.dim <= 9:
            raise EquationError("dimension must be between 1 and 9")
        if self.rhs is not None:
            if self.pivot is None or self.pivot.order != 2:
                raise EquationError("solved form needs a second-order pivot jet")
            if self.rhs.depends_on(self.pivot):
                raise EquationError("solved right-hand side contains the pivot")
            if any(a.kind == "u" and a.order > 2 for a in self.rhs.atoms()):
                raise EquationError("solved right-hand side has jets of order > 2")

    @property
    def solved(self) -> bool:
        return self.rhs is not None

    def specialized(self) -> "Equation":
        """Substitute every parameter that carries a rational value."""
        b = {A.param(k): as_expr(v) for k, v in self.params.items() if v is not None}
        if not b:
            return self

        def sub(e):
            return None if e is None else normalize(substitute(e, b))

        lax = None
        if self.lax is not None:
            lax = tuple(tuple(sub(c) for c in vf) for vf in self.lax)
        keep = {k: v for k, v in self.params.items() if v is None}
        return replace(self, F=sub(self.F), rhs=sub(self.rhs), sqrtdet=sub(self.sqrtdet),
                       lax=lax, params=keep)

    def with_params(self, values: dict) -> "Equation":
        unknown = set(values) - set(self.params)
        if unknown:
            raise EquationError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        p = dict(self.params)
        p.update({k: (None if v is None else Fraction(v)) for k, v in values.items()})
        return replace(self, params=p)

    def with_defaults(self) -> "Equation":
        """Give every still-symbolic parameter its stored default value."""
        d = {k: v for k, v in self.meta.get("defaults", {}).items() if self.params.get(k) is None}
        return self.with_params(d) if d else self

    def second_order_jets(self) -> list:
        return A.jets_of_order(self.dim, 2)


def equation(name: str, dim: int, F, *, solved=None, sqrtdet=None, params=None,
             lax=None, formal_args=(), meta=None) -> Equation:
    """Convenience constructor taking expression strings or Exprs."""
    params = dict(params or {})
    pn = tuple(params)

    def ex(t):
        return parse(t, dim=dim, params=pn) if isinstance(t, str) else as_expr(t)

    pivot = rhs = None
    if solved is not None:
        pv, r = solved
        pivot = A.jet(*pv) if isinstance(pv, tuple) else pv
        rhs = ex(r)
    if lax is not None:
        lax = tuple(tuple(ex(c) for c in vf) for vf in lax)
    return Equation(name, dim, ex(F), pivot, rhs, None if sqrtdet is None else ex(sqrtdet),
                    {k: (None if v is None else Fraction(v)) for k, v in params.items()},
                    lax, tuple(formal_args), dict(meta or {}))


# ----------------------------------------------------- total derivative


class _DerivCache:
    def __init__(self):
        self.atoms: dict = {}
        self.factors: dict = {}
        self.lock = threading.Lock()


_cache = _DerivCache()


def _atom_total(a: A.Atom, i: int, formal_args: tuple, max_order: int):
    key = (a.id, i, formal_args, max_order)
    hit = _cache.atoms.get(key, False)
    if hit is not False:
        return hit
    k = a.kind
    if k == "x":
        out = {0: ONE} if a.data == i else None
    elif k == "u":
        if a.order + 1 > max_order:
            raise JetOrderError(f"D{i} of {a.name} exceeds jet order {max_order}")
        out = {A.jet(*a.data, i).unit: ONE}
    elif k == "df":
        acc: dict = {}
        for b in formal_args:
            db = _atom_total(b, i, formal_args, max_order)
            if db:
                acc = padd(acc, pmulterm(db, A.df(a.data + (b,)).unit, ONE))
        out = acc or None
    else:
        out = None
    _cache.atoms[key] = out
    return out


def _ptotal(p: dict, i: int, formal_args: tuple, max_order: int) -> dict:
    out: dict = {}
    for a in atoms_of(p):
        da = _atom_total(a, i, formal_args, max_order)
        if not da:
            continue
        dp = pdiff(p, a.shift)
        if len(da) == 1:
            (m, c), = da.items()
            out = padd(out, pmulterm(dp, m, c))
        else:
            out = padd(out, pmul(dp, da))
    return out


def _factor_total(f, i, formal_args, max_order):
    key = (f.id, i, formal_args, max_order)
    v = _cache.factors.get(key)
    if v is None:
        v = _cache.factors[key] = _ptotal(f.poly, i, formal_args, max_order)
    return v


def total_derivative(e, i: int, *, formal_args: tuple = (), max_order: int = MAX_ORDER,
                     dim: int | None = None) -> Expr:
    """``D_i e``: x_i -> 1, u[a] -> u[a+i], df[S] -> sum_b df[S+b] D_i b.

    ``formal_args`` lists the arguments (jets or variables) of the formal
    function whose derivatives ``df[..]`` may appear in ``e``.
    """
    e = as_expr(e)
    if dim is not None and not 1 <= i <= dim:
        raise ValueError(f"direction {i} out of range 1..{dim}")
    formal_args = tuple(formal_args)
    dn = _ptotal(e.num, i, formal_args, max_order)
    dep = []
    for f, k in e.den:
        df_ = _factor_total(f, i, formal_args, max_order)
        if df_:
            dep.append((f, k, df_))
    if not dep:
        return Expr(dn, e.den)
    # D(N / prod f^k) = (DN * P - N * sum k Df P/f) / (den * P), P = prod of dependent f
    P = {0: ONE}
    for f, _, _ in dep:
        P = pmul(P, f.poly)
    acc = pmul(dn, P)
    for f, k, dfp in dep:
        others = {0: ONE}
        for g, _, _ in dep:
            if g is not f:
                others = pmul(others, g.poly)
        acc = psub(acc, pscale(pmul(pmul(e.num, dfp), others), mpq(k)))
    den = _merge_den(e.den, tuple(sorted(((f, 1) for f, _, _ in dep), key=lambda t: t[0].id)))
    return Expr(acc, den)


def total_derivative_multi(e, idx, **kw) -> Expr:
    for i in idx:
        e = total_derivative(e, i, **kw)
    return e


# ---------------------------------------------------------- restriction


def _remove_pair(data: tuple, pair: tuple):
    rest = list(data)
    for p in pair:
        if p not in rest:
            return None
        rest.remove(p)
    return tuple(rest)


class Restrictor:
    """Eliminates pivot-rooted jets using the solved form and its prolongations.

    A jet ``u[tau]`` is pivot-rooted when ``tau`` contains the pivot's index
    pair; it is replaced by ``P(tau - pivot)`` where ``P(()) = rhs`` and
    ``P(sigma) = restrict(D_j P(sigma - j))``.  Each ``P`` value is itself
    restricted, so one substitution pass suffices.
    """

    def __init__(self, eq: Equation, max_order: int = MAX_ORDER):
        if not eq.solved:
            raise RestrictionError(f"equation {eq.name} has no solved form")
        self.eq = eq
        self.pair = eq.pivot.data
        self.max_order = max_order
        self.formal_args = eq.formal_args
        self._memo: dict = {(): eq.rhs}
        self._busy: set = set()
        self._lock = threading.RLock()
        self._jet_memo: dict = {}

    def rooted(self, a: A.Atom):
        if a.kind != "u":
            return None
        r = self._jet_memo.get(a.id, False)
        if r is False:
            r = self._jet_memo[a.id] = _remove_pair(a.data, self.pair)
        return r

    def value(self, sigma: tuple) -> Expr:
        sigma = tuple(sorted(sigma))
        with self._lock:
            v = self._memo.get(sigma)
            if v is not None:
                return v
            if sigma in self._busy:
                raise RestrictionError(
                    f"solved form for {self.eq.pivot.name} is not triangular: "
                    f"prolongation {sigma} depends on itself")
            if len(sigma) + 2 > self.max_order:
                raise JetOrderError(f"prolongation of the pivot exceeds jet order {self.max_order}")
            self._busy.add(sigma)
            try:
                j = sigma[-1]
                d = total_derivative(self.value(sigma[:-1]), j, formal_args=self.formal_args,
                                     max_order=self.max_order)
                v = normalize(self(d))
            finally:
                self._busy.discard(sigma)
            self._memo[sigma] = v
            return v

    def __call__(self, e) -> Expr:
        e = as_expr(e)
        b = {}
        for a in e.atoms():
            s = self.rooted(a)
            if s is not None:
                b[a] = self.value(s)
        if not b:
            return e
        return substitute(e, b)


_restrictors: dict = {}
_rlock = threading.Lock()


def restrictor(eq: Equation, max_order: int = MAX_ORDER) -> Restrictor:
    key = (eq.pivot, eq.rhs, eq.formal_args, max_order)
    with _rlock:
        r = _restrictors.get(key)
        if r is None:
            r = _restrictors[key] = Restrictor(eq, max_order)
        return r


def restrict(e, eq: Equation, max_order: int = MAX_ORDER) -> Expr:
    """Value of ``e`` on solutions of ``eq`` (pivot-rooted jets eliminated)."""
    return normalize(restrictor(eq, max_order)(e))


# --------------------------------------------------------------- pivots


def solve_pivot(eq: Equation, pivot) -> Equation:
    """Solve ``F = 0`` for a second-order jet in which ``F`` is affine."""
    if isinstance(pivot, str):
        from halfflat.symkernel.parse import parse_atom

        pivot = parse_atom(pivot)
    elif isinstance(pivot, tuple):
        pivot = A.jet(*pivot)
    if pivot.kind != "u" or pivot.order != 2:
        raise EquationError("pivot must be a second-order jet")
    F = eq.F
    if not F.depends_on(pivot):
        raise EquationError(f"pivot {pivot.name} does not occur in F")
    coef = normalize(diff(F, pivot))
    if coef.depends_on(pivot) or any(f.depends_on(pivot.shift) for f, _ in F.den):
        raise EquationError(f"F is not affine in {pivot.name}")
    if coef.is_zero():
        raise EquationError(f"coefficient of {pivot.name} vanishes")
    F0 = substitute(F, {pivot: ZERO})
    rhs = normalize(-F0 / coef)
    return replace(eq, pivot=pivot, rhs=rhs)


def _triangular(eq: Equation) -> bool:
    try:
        r = Restrictor(eq, max_order=4)
        for i in range(1, eq.dim + 1):
            r.value((i,))
        return True
    except (RestrictionError, JetOrderError):
        return False


def ensure_solved(eq: Equation) -> Equation:
    """Return ``eq`` with a solved form, picking the first usable pivot if needed."""
    if eq.solved:
        return eq
    for j in eq.second_order_jets():
        if not eq.F.depends_on(j):
            continue
        try:
            cand = solve_pivot(eq, j)
        except EquationError:
            continue
        if _triangular(cand):
            return cand
    raise EquationError(f"{eq.name}: F is affine in no second-order jet usable as pivot")


def check_consistency(eq: Equation) -> bool:
    """Both forms present: F restricted to the solved form vanishes."""
    return restrict(eq.F, eq).is_zero()


# --------------------------------------------------------------- sampling


def free_atoms(exprs) -> list:
    """Atoms needing a value to evaluate ``exprs``, in canonical order."""
    mask = 0
    for e in exprs:
        e = as_expr(e)
        mask |= support_mask(e.num)
        for f, _ in e.den:
            mask |= f.mask
    return sorted(A.atom_mask(mask), key=lambda a: a.sortkey)


def random_point(atoms_, rng: random.Random, skip=()) -> Point:
    """Integer values uniform in [-10^6, 10^6], assigned in canonical atom order."""
    vals = {}
    for a in atoms_:
        if a in skip:
            continue
        vals[a] = rng.randint(-SAMPLE_RANGE, SAMPLE_RANGE)
    return Point(vals)


def eval_on_samples(exprs, k: int, seed: int, tries: int = 20, fixed=None):
    """Evaluate ``exprs`` at ``k`` random points; resample on poles.

    Returns a list of ``(point, values)``.  ``fixed`` pins some atoms.
    """
    exprs = [as_expr(e) for e in exprs]
    atoms_ = free_atoms(exprs)
    rng = random.Random(seed)
    out = []
    for _ in range(k):
        for _attempt in range(tries):
            p = random_point(atoms_, rng)
            if fixed:
                for a, v in fixed.items():
                    p.vals[a.id] = mpq(v)
                    p.assignment[a] = mpq(v)
            try:
                out.append((p, [p(e) for e in exprs]))
                break
            except PoleError:
                continue
        else:
            raise PoleError(f"all {tries} samples hit a pole")
    return out


# -------------------------------------------------------- characteristic


def quadric_matrix(eq: Equation, restricted: bool = True):
    """``Q[a][b] = dF/du[a,b] / (1 + delta_ab)`` as a nested list of Expr."""
    d = eq.dim
    Q = [[ZERO] * d for _ in range(d)]
    half = Expr.const(Fraction(1, 2))
    for a in range(1, d + 1):
        for b in range(a, d + 1):
            v = normalize(diff(eq.F, A.jet(a, b), eq.formal_args or None))
            if a != b:
                v = v * half
            Q[a - 1][b - 1] = Q[b - 1][a - 1] = v
    if restricted and eq.solved:
        r = restrictor(eq)
        cache = {}
        for a in range(d):
            for b in range(a, d):
                v = Q[a][b]
                key = id(v)
                if key not in cache:
                    cache[key] = normalize(r(v))
                Q[a][b] = Q[b][a] = cache[key]
    return Q


def characteristic_rank(eq: Equation, mode: str = "sampled", seed: int = 0, samples: int = 8) -> int:
    """Generic rank of the characteristic quadric on solutions."""
    eq = eq.specialized()
    if not eq.solved:
        try:
            eq = ensure_solved(eq)
        except EquationError:
            pass
    Q = quadric_matrix(eq)
    if mode == "symbolic":
        from halfflat.linalg import rank

        return rank([[normalize(v) for v in row] for row in Q])
    flat = [v for row in Q for v in row]
    best = 0
    d = eq.dim
    for _, vals in eval_on_samples(flat, samples, seed):
        rows = [vals[i * d:(i + 1) * d] for i in range(d)]
        best = max(best, field_rank(rows))
    return best


# ----------------------------------------------------------- file format


def _split_kv(line: str, lineno: int):
    if "=" not in line:
        raise EquationError(f"line {lineno}: expected 'key = value'")
    k, v = line.split("=", 1)
    return k.strip(), v.strip()


def loads(text: str, source: str = "<string>") -> Equation:
    """Parse the ``.eq`` key/value format."""
    fields = {}
    params: dict = {}
    defaults: dict = {}
    raw = []
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("param "):
            body = s[6:].strip()
            if "=" in body:
                k, v = _split_kv(body, n)
                try:
                    params[k] = Fraction(v)
                except ValueError:
                    raise EquationError(f"{source}:{n}: parameter value must be rational") from None
            else:
                params[body] = None
            continue
        if s.startswith("default "):
            k, v = _split_kv(s[8:], n)
            try:
                defaults[k] = Fraction(v)
            except ValueError:
                raise EquationError(f"{source}:{n}: default value must be rational") from None
            continue
        raw.append((n, s))
    for n, s in raw:
        if s.startswith("solved:"):
            body = s[len("solved:"):]
            k, v = _split_kv(body, n)
            fields["solved"] = (k, v, n)
            continue
        k, v = _split_kv(s, n)
        if k in fields:
            raise EquationError(f"{source}:{n}: duplicate key {k!r}")
        fields[k] = (v, n)
    for req in ("name", "dim", "F"):
        if req not in fields:
            raise EquationError(f"{source}: missing required key {req!r}")
    try:
        dim = int(fields["dim"][0])
    except ValueError:
        raise EquationError(f"{source}: dim must be an integer") from None
    known = {"name", "dim", "F", "solved", "sqrtdet", "lax.X", "lax.Y", "note", "expect", "provenance"}
    extra = set(fields) - known
    if extra:
        raise EquationError(f"{source}: unknown key(s) {', '.join(sorted(extra))}")
    pn = tuple(params)

    def ex(v, n):
        try:
            return normalize(parse(v, dim=dim, params=pn))
        except ValueError as exc:
            raise EquationError(f"{source}:{n}: {exc}") from None

    F = ex(*fields["F"])
    pivot = rhs = None
    if "solved" in fields:
        k, v, n = fields["solved"]
        pivot = ex(k, n)
        atoms_ = pivot.atoms()
        if len(atoms_) != 1 or pivot != Expr.atom(next(iter(atoms_))):
            raise EquationError(f"{source}:{n}: solved form must start with a single jet")
        pivot = next(iter(atoms_))
        rhs = ex(v, n)
    sqrtdet = ex(*fields["sqrtdet"]) if "sqrtdet" in fields else None
    lax = None
    if "lax.X" in fields or "lax.Y" in fields:
        if not ("lax.X" in fields and "lax.Y" in fields):
            raise EquationError(f"{source}: lax.X and lax.Y must both be given")
        lax = []
        for key in ("lax.X", "lax.Y"):
            v, n = fields[key]
            comps = [c for c in _split_top(v)]
            if len(comps) != dim:
                raise EquationError(f"{source}:{n}: {key} needs {dim} components")
            lax.append(tuple(ex(c, n) for c in comps))
        lax = tuple(lax)
    meta = {k: fields[k][0] for k in ("note", "expect", "provenance") if k in fields}
    if set(defaults) - set(params):
        raise EquationError(f"{source}: default given for an undeclared parameter")
    if defaults:
        meta["defaults"] = defaults
    try:
        return Equation(fields["name"][0], dim, F, pivot, rhs, sqrtdet, params, lax, (), meta)
    except EquationError as exc:
        raise EquationError(f"{source}: {exc}") from None


def _split_top(v: str) -> list:
    # split on commas not nested inside brackets or parentheses
    out, depth, cur = [], 0, []
    for ch in v:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur).strip())
    return out


def load(path) -> Equation:
    p = Path(path)
    return loads(p.read_text(encoding="utf-8"), source=str(p))


def dumps(eq: Equation) -> str:
    lines = [f"name = {eq.name}", f"dim = {eq.dim}"]
    for k, v in eq.params.items():
        lines.append(f"param {k}" if v is None else f"param {k} = {v}")
    for k, v in eq.meta.get("defaults", {}).items():
        lines.append(f"default {k} = {v}")
    lines.append(f"F = {render(eq.F)}")
    if eq.solved:
        lines.append(f"solved: {eq.pivot.name} = {render(eq.rhs)}")
    if eq.sqrtdet is not None:
        lines.append(f"sqrtdet = {render(eq.sqrtdet)}")
    if eq.lax is not None:
        lines.append("lax.X = " + ", ".join(render(c) for c in eq.lax[0]))
        lines.append("lax.Y = " + ", ".join(render(c) for c in eq.lax[1]))
    for k in ("provenance", "expect", "note"):
        if k in eq.meta:
            lines.append(f"{k} = {eq.meta[k]}")
    return "\n".join(lines) + "\n"


__all__ = [
    "Equation", "EquationError", "JetOrderError", "MAX_ORDER", "RestrictionError", "Restrictor",
    "characteristic_rank", "check_consistency", "dumps", "ensure_solved", "equation",
    "eval_on_samples", "free_atoms", "load", "loads", "quadric_matrix", "random_point",
    "restrict", "restrictor", "solve_pivot", "total_derivative", "total_derivative_multi",
    "ONE_EXPR",
]
