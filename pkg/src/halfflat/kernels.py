"""Selects the compiled polynomial kernels when built, else the pure-Python ones.

Set ``HALFFLAT_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("HALFFLAT_PURE_PYTHON") != "1":
    try:
        from halfflat._kernels import padd, pdiff, peval, pmul, pmulterm, pscale, psub  # noqa: F401

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from halfflat._kernels_py import padd, pdiff, peval, pmul, pmulterm, pscale, psub  # noqa: F401
