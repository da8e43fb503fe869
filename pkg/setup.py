import os

from setuptools import Extension, setup

# The compiled CSR kernels are optional: without Cython (or with
# LMOSELECT_NO_EXT=1) the package installs pure-Python and selects the
# NumPy fallback at import time.
ext_modules = []
if os.environ.get("LMOSELECT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext = Extension(
            "lmoselect.kernels._core",
            sources=["src/lmoselect/kernels/_core.pyx"],
        )
        ext_modules = cythonize(
            [ext],
            language_level=3,
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
