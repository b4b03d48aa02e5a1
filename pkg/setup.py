import os

from setuptools import Extension, setup

# the compiled kernels are optional: without Cython (or with
# HALFFLAT_NO_EXT=1) the pure-Python fallback is used at import time
ext_modules = []
if os.environ.get("HALFFLAT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("halfflat._kernels", ["src/halfflat/_kernels.pyx"], extra_compile_args=["-O2"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
