"""Built-in equations, Lax pairs, point maps and symmetry generators.

Entries live as ``.eq``, ``.map`` and ``.vf`` files in the package's
``data`` directory and ship inside the installed package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from halfflat import jets
from halfflat.equivalence import PointMap, PointVectorField, read_point_map, read_vector_field


class CatalogError(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    equation: jets.Equation
    provenance: str
    expect: str = "pass"
    symmetries: dict = field(default_factory=dict, compare=False)
    maps: tuple = ()

    @property
    def has_lax(self) -> bool:
        return self.equation.lax is not None


@dataclass(frozen=True)
class MapEntry:
    name: str
    map: PointMap
    source: str
    target: str
    provenance: str


# point maps: name -> (source equation, target equation, provenance)
MAP_INFO = {
    "eq12": ("heavenly2_f_bilinear", "heavenly2_f_x1", "point map between Table 1 rows 1 and 2"),
    "eq34": ("heavenly2_f_x3", "heavenly2", "point map between Table 1 rows 3 and 4"),
}

# fixed listing order
NAMES = (
    "wave4d", "heavenly2", "heavenly2_lax_sec13", "heavenly2_f_bilinear", "heavenly2_f_x1",
    "heavenly2_f_x3", "heavenly1", "heavenly1_u1", "heavenly1_u1u3", "genheavenly",
    "genheavenly_c", "genheavenly_x", "veronese3d", "veronese4d", "heavenly6d", "heavenly8d",
    "veronese5d", "ma_counterexample",
)


def _data():
    return resources.files("halfflat") / "data"


def _text(fname: str) -> str:
    p = _data() / fname
    if not p.is_file():
        raise CatalogError(f"catalog file {fname} is missing")
    return p.read_text(encoding="utf-8")


_CACHE: dict = {}


def names() -> tuple:
    return NAMES


def load(name: str) -> CatalogEntry:
    """Catalog entry ``name`` with parameters still symbolic."""
    if name in _CACHE:
        return _CACHE[name]
    if name not in NAMES:
        raise CatalogError(f"unknown catalog entry {name!r}")
    eq = jets.loads(_text(f"{name}.eq"), source=f"catalog:{name}")
    syms = {}
    for p in sorted(_data().iterdir(), key=lambda p: p.name):
        if p.name.startswith(name + ".") and p.name.endswith(".vf"):
            label = p.name[len(name) + 1:-3]
            with resources.as_file(p) as path:
                syms[label] = read_vector_field(path, eq.dim, params=tuple(eq.params))
    maps = tuple(m for m, (src, tgt, _) in MAP_INFO.items() if name in (src, tgt))
    entry = CatalogEntry(name, eq, eq.meta.get("provenance", ""), eq.meta.get("expect", "pass"),
                         syms, maps)
    _CACHE[name] = entry
    return entry


def equation(name: str, defaults: bool = False) -> jets.Equation:
    eq = load(name).equation
    return eq.with_defaults() if defaults else eq


def load_map(name: str) -> MapEntry:
    if name not in MAP_INFO:
        raise CatalogError(f"unknown point map {name!r}")
    src, tgt, prov = MAP_INFO[name]
    with resources.as_file(_data() / f"{name}.map") as path:
        m = read_point_map(path, dim=4)
    return MapEntry(name, m, src, tgt, prov)


def map_names() -> tuple:
    return tuple(MAP_INFO)


def listing() -> list:
    """One dict per entry, for ``catalog list``."""
    out = []
    for n in NAMES:
        e = load(n)
        eq = e.equation
        out.append({
            "name": n,
            "kind": "equation",
            "dim": eq.dim,
            "provenance": e.provenance,
            "lax": e.has_lax,
            "expect": e.expect,
            "params": sorted(eq.params),
            "symmetries": sorted(e.symmetries),
        })
    for n in MAP_INFO:
        src, tgt, prov = MAP_INFO[n]
        out.append({"name": n, "kind": "map", "source": src, "target": tgt, "provenance": prov})
    return out


def symmetry(name: str, label: str) -> PointVectorField:
    syms = load(name).symmetries
    if label not in syms:
        raise CatalogError(f"{name} has no symmetry generator {label!r}")
    return syms[label]
