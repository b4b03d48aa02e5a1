"""Interned atoms: the indeterminates of the expression engine.

Each atom owns a 16-bit exponent field inside the packed-integer monomial
encoding used by :mod:`halfflat.symkernel.poly`.  Atom ids are assigned in
creation order; canonical *printing* order is given by :attr:`Atom.sortkey`
and never depends on the id.
"""

from __future__ import annotations

import sys
import threading
from array import array
from typing import Iterable

FIELD_BITS = 16
FIELD_MASK = (1 << FIELD_BITS) - 1
MAX_EXP = 1 << (FIELD_BITS - 1)

_KIND_RANK = {"x": 0, "u": 1, "lam": 2, "param": 3, "df": 4, "s": 5}


class Atom:
    __slots__ = ("kind", "data", "id", "shift", "unit", "sortkey", "_name")

    def __init__(self, kind: str, data, ident: int):
        self.kind = kind
        self.data = data
        self.id = ident
        self.shift = ident * FIELD_BITS
        self.unit = 1 << self.shift
        if kind == "x":
            self.sortkey = (0, data)
        elif kind == "u":
            self.sortkey = (1, len(data), data)
        elif kind == "df":
            self.sortkey = (4, len(data), tuple(a.sortkey for a in data))
        elif kind == "param":
            self.sortkey = (3, data)
        else:
            self.sortkey = (_KIND_RANK[kind],)
        self._name = None

    @property
    def order(self) -> int:
        """Jet order (0 for ``u``); -1 for non-jet atoms."""
        return len(self.data) if self.kind == "u" else -1

    @property
    def is_jet(self) -> bool:
        return self.kind == "u"

    def __repr__(self) -> str:
        return self.name

    @property
    def name(self) -> str:
        if self._name is None:
            k = self.kind
            if k == "x":
                self._name = f"x{self.data}"
            elif k == "u":
                self._name = "u" if not self.data else "u[" + ",".join(map(str, self.data)) + "]"
            elif k == "lam":
                self._name = "lam"
            elif k == "s":
                self._name = "s"
            elif k == "param":
                self._name = self.data
            else:
                self._name = "df[" + ",".join(a.name for a in self.data) + "]"
        return self._name

    def __lt__(self, other: "Atom") -> bool:
        return self.sortkey < other.sortkey

    # atoms are interned: identity is equality
    __hash__ = object.__hash__


_lock = threading.Lock()
_table: dict = {}
_by_id: list[Atom] = []


def _intern(kind: str, data) -> Atom:
    key = (kind, data)
    atom = _table.get(key)
    if atom is not None:
        return atom
    with _lock:
        atom = _table.get(key)
        if atom is None:
            atom = Atom(kind, data, len(_by_id))
            _by_id.append(atom)
            _table[key] = atom
    return atom


def atom_by_id(i: int) -> Atom:
    return _by_id[i]


def n_atoms() -> int:
    return len(_by_id)


def var(i: int) -> Atom:
    if not 1 <= i <= 9:
        raise ValueError(f"independent variable index {i} out of range 1..9")
    return _intern("x", i)


def jet(*idx: int) -> Atom:
    """Jet coordinate ``u[idx]``; indices are sorted (``jet(2, 1) is jet(1, 2)``)."""
    if len(idx) == 1 and isinstance(idx[0], (tuple, list)):
        idx = tuple(idx[0])
    for i in idx:
        if not 1 <= i <= 9:
            raise ValueError(f"jet index {i} out of range 1..9")
    return _intern("u", tuple(sorted(idx)))


def lam() -> Atom:
    return _intern("lam", None)


def root() -> Atom:
    return _intern("s", None)


def param(name: str) -> Atom:
    return _intern("param", name)


def df(args: Iterable[Atom] = ()) -> Atom:
    """Formal derivative symbol of the undetermined function f w.r.t. ``args``."""
    args = tuple(sorted(args, key=lambda a: a.sortkey))
    for a in args:
        if a.kind not in ("u", "x"):
            raise ValueError(f"formal derivative argument must be a jet or variable, got {a}")
    return _intern("df", args)


def jets_of_order(d: int, order: int) -> list[Atom]:
    """All jets of the given order in dimension ``d``, in canonical order."""
    out: list[tuple[int, ...]] = []

    def rec(start: int, acc: tuple[int, ...]):
        if len(acc) == order:
            out.append(acc)
            return
        for i in range(start, d + 1):
            rec(i, acc + (i,))

    rec(1, ())
    return [jet(*t) for t in out]


def decode(m: int) -> list[tuple[Atom, int]]:
    """Split a packed monomial into ``(atom, exponent)`` pairs ordered by id."""
    if not m:
        return []
    fields = array("H", m.to_bytes((m.bit_length() + 15) // 16 * 2, "little"))
    if sys.byteorder != "little":
        fields.byteswap()
    return [(_by_id[i], e) for i, e in enumerate(fields) if e]


def atom_mask(m: int) -> list[Atom]:
    return [a for a, _ in decode(m)]
