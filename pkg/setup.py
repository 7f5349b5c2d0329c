"""Build script for the optional Cython closure kernel.

The pure-Python fallback in ``hetprice._closure_py`` is used whenever the
extension is missing, so a failed compile only costs speed.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("HETPRICE_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "hetprice._closure_ext",
                    ["src/hetprice/_closure_ext.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
