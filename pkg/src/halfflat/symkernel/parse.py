"""Recursive-descent parser for the expression grammar.

::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-'|'+')* base ('^' '-'? integer)?
    base   := integer | 'x'digit | 'u' ('[' idxlist ']')? | 'lam'
            | 'df' '[' atomlist? ']' | 's' | param-name | '(' expr ')'

Unary signs and negative exponents are the only extensions of the basic
grammar.  Parameter names are accepted only when declared by the caller.
"""

from __future__ import annotations

from typing import Iterable

from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import Expr, as_expr


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


class _Parser:
    def __init__(self, text: str, dim: int | None, params: Iterable[str]):
        self.s = text
        self.i = 0
        self.dim = dim
        self.params = set(params)

    # -- lexing helpers
    def ws(self):
        s = self.s
        while self.i < len(s) and s[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self.ws()
        return self.s[self.i] if self.i < len(self.s) else ""

    def eat(self, ch: str):
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", self.i)
        self.i += 1

    def integer(self) -> int:
        self.ws()
        j = self.i
        while self.i < len(self.s) and self.s[self.i].isdigit():
            self.i += 1
        if j == self.i:
            raise ParseError("expected integer", j)
        return int(self.s[j:self.i])

    def word(self) -> str:
        self.ws()
        j = self.i
        s = self.s
        if self.i < len(s) and (s[self.i].isalpha() or s[self.i] == "_"):
            self.i += 1
            while self.i < len(s) and (s[self.i].isalnum() or s[self.i] == "_"):
                self.i += 1
        return s[j:self.i]

    # -- grammar
    def parse(self) -> Expr:
        e = self.expr()
        self.ws()
        if self.i != len(self.s):
            raise ParseError(f"unexpected {self.s[self.i]!r}", self.i)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.s[self.i]
            self.i += 1
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek() in ("*", "/"):
            op = self.s[self.i]
            self.i += 1
            f = self.factor()
            e = e * f if op == "*" else e / f
        return e

    def factor(self) -> Expr:
        c = self.peek()
        if c in ("-", "+"):
            self.i += 1
            f = self.factor()
            return -f if c == "-" else f
        b = self.base()
        if self.peek() == "^":
            self.i += 1
            neg = False
            if self.peek() == "-":
                neg = True
                self.i += 1
            n = self.integer()
            b = b ** (-n if neg else n)
        return b

    def base(self) -> Expr:
        c = self.peek()
        pos = self.i
        if c == "":
            raise ParseError("unexpected end of input", pos)
        if c == "(":
            self.i += 1
            e = self.expr()
            self.eat(")")
            return e
        if c.isdigit():
            return Expr.const(self.integer())
        if c.isalpha() or c == "_":
            return Expr.atom(self.atom_tail(self.word(), pos))
        raise ParseError(f"unexpected {c!r}", pos)

    def atom_tail(self, w: str, pos: int):
        if len(w) == 2 and w[0] == "x" and w[1].isdigit():
            i = int(w[1])
            self.check_index(i, pos)
            return A.var(i)
        if w == "u":
            if self.peek() == "[":
                idx = self.idxlist()
                for i in idx:
                    self.check_index(i, pos)
                return A.jet(*idx)
            return A.jet()
        if w == "lam":
            return A.lam()
        if w == "s":
            return A.root()
        if w == "df":
            self.eat("[")
            args = []
            if self.peek() != "]":
                while True:
                    p = self.i
                    args.append(self.atom_tail(self.word(), p))
                    if self.peek() == ",":
                        self.i += 1
                        continue
                    break
            self.eat("]")
            for a in args:
                if a.kind not in ("u", "x"):
                    raise ParseError("formal derivative arguments must be jets or variables", pos)
            return A.df(args)
        if w and w in self.params:
            return A.param(w)
        if not w:
            raise ParseError("expected identifier", pos)
        raise ParseError(f"unknown identifier {w!r}", pos)

    def idxlist(self) -> list[int]:
        self.eat("[")
        out = []
        while True:
            self.ws()
            p = self.i
            if self.i < len(self.s) and self.s[self.i].isdigit():
                out.append(int(self.s[self.i]))
                self.i += 1
                if self.i < len(self.s) and self.s[self.i].isdigit():
                    raise ParseError("jet indices are single digits", p)
            else:
                raise ParseError("expected jet index", p)
            if self.peek() == ",":
                self.i += 1
                continue
            break
        self.eat("]")
        return out

    def check_index(self, i: int, pos: int):
        hi = self.dim if self.dim is not None else 9
        if not 1 <= i <= hi:
            raise ParseError(f"index {i} out of range 1..{hi}", pos)


def parse(text: str, dim: int | None = None, params: Iterable[str] = ()) -> Expr:
    """Parse ``text`` into an :class:`Expr`; see the module docstring."""
    return _Parser(text, dim, params).parse()


def parse_atom(text: str, params: Iterable[str] = ()):
    p = _Parser(text, None, params)
    pos = p.i
    a = p.atom_tail(p.word(), pos)
    p.ws()
    if p.i != len(p.s):
        raise ParseError("trailing input after atom", p.i)
    return a


def sym(text: str, **kw) -> Expr:
    """Shorthand used throughout the package and tests."""
    return as_expr(parse(text, **kw))
