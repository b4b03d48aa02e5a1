"""Exact symbolic kernel: atoms, expressions, parsing, normalization."""

from halfflat.symkernel.atoms import Atom, df, jet, jets_of_order, lam, param, root, var
from halfflat.symkernel.expr import (
    ONE_EXPR,
    ZERO,
    Expr,
    Point,
    PoleError,
    UnboundAtomError,
    as_expr,
    diff,
    eval_rational,
    is_zero,
    normalize,
    render,
    split_root,
    substitute,
)
from halfflat.symkernel.parse import ParseError, parse, parse_atom, sym

__all__ = [
    "Atom", "Expr", "ONE_EXPR", "ZERO", "ParseError", "Point", "PoleError", "UnboundAtomError",
    "as_expr", "df", "diff", "eval_rational", "is_zero", "jet", "jets_of_order", "lam",
    "normalize", "param", "parse", "parse_atom", "render", "root", "split_root", "substitute",
    "sym", "var",
]
