"""Compare the compiled polynomial kernels with the pure-Python fallback.

Micro-benchmarks call both kernel modules directly on the same random
polynomials.  End-to-end timings run a few checks in subprocesses, once
with the default backend and once with ``HALFFLAT_PURE_PYTHON=1``.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import timeit

from gmpy2 import mpq

from halfflat import _kernels_py
from halfflat.symkernel import atoms as A

try:
    from halfflat import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

END_TO_END = {
    "halfflat genheavenly_x": "from halfflat import catalog; from halfflat.confgeom import halfflat_check;"
                              "halfflat_check(catalog.equation('genheavenly_x'), seed=0)",
    "halfflat heavenly2 symbolic": "from halfflat import catalog; from halfflat.confgeom import halfflat_check;"
                                   "halfflat_check(catalog.equation('heavenly2'), mode='symbolic')",
    "constraints default jet": "from halfflat.constraints import derive_constraints; derive_constraints()",
    "minor span heavenly8d": "from halfflat import catalog; from halfflat.mongeampere import check_minor_span;"
                             "check_minor_span(catalog.equation('heavenly8d'))",
}


def random_poly(rng, atoms, terms, max_exp=3):
    p = {}
    for _ in range(terms):
        m = 0
        for a in rng.sample(atoms, rng.randint(1, 4)):
            m += rng.randint(1, max_exp) << a.shift
        p[m] = p.get(m, mpq(0)) + mpq(rng.randint(-50, 50), rng.randint(1, 9))
    return {m: c for m, c in p.items() if c}


def micro(repeat: int) -> dict:
    rng = random.Random(0)
    atoms = [A.jet(i, j) for i in range(1, 5) for j in range(i, 5)] + [A.var(1), A.var(2)]
    a = random_poly(rng, atoms, 60)
    b = random_poly(rng, atoms, 40)
    vals = [None] * A.n_atoms()
    for x in atoms:
        vals[x.id] = mpq(rng.randint(-99, 99), rng.randint(1, 9))
    ops = {
        "padd": lambda k: k.padd(a, b),
        "pmul": lambda k: k.pmul(a, b),
        "pdiff": lambda k: k.pdiff(a, atoms[0].shift),
        "peval": lambda k: k.peval(a, vals),
    }
    out = {}
    for name, fn in ops.items():
        row = {"python": min(timeit.repeat(lambda: fn(_kernels_py), number=20, repeat=repeat)) / 20}
        if _kernels_c is not None:
            assert fn(_kernels_c) == fn(_kernels_py)
            row["cython"] = min(timeit.repeat(lambda: fn(_kernels_c), number=20, repeat=repeat)) / 20
        out[name] = row
    return out


def end_to_end(repeat: int) -> dict:
    out = {}
    for name, code in END_TO_END.items():
        row = {}
        for backend, env_val in (("cython", None), ("python", "1")):
            if backend == "cython" and _kernels_c is None:
                continue
            env = dict(os.environ)
            env.pop("HALFFLAT_PURE_PYTHON", None)
            if env_val:
                env["HALFFLAT_PURE_PYTHON"] = env_val
            stmt = (f"import time, halfflat.kernels as k; t = time.perf_counter(); {code}; "
                    f"print(k.BACKEND, time.perf_counter() - t)")
            best = None
            for _ in range(repeat):
                r = subprocess.run([sys.executable, "-c", stmt], env=env, capture_output=True,
                                   text=True, check=True)
                used, secs = r.stdout.split()
                if used != backend:
                    raise RuntimeError(f"expected backend {backend}, got {used}")
                best = float(secs) if best is None else min(best, float(secs))
            row[backend] = best
        out[name] = row
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    res = {"micro_seconds_per_call": micro(args.repeat), "end_to_end_seconds": end_to_end(args.repeat)}
    if args.json:
        print(json.dumps(res, indent=2, sort_keys=True))
        return 0
    if _kernels_c is None:
        print("compiled kernels not built; showing the pure-Python fallback only")
    for section, rows in res.items():
        print(section)
        for name, row in rows.items():
            py, cy = row.get("python"), row.get("cython")
            line = f"  {name:30s} python {py:.3g}"
            if cy is not None:
                line += f"  cython {cy:.3g}  speedup {py / cy:.2f}x"
            print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
