"""Builds the optional compiled kernel extension.

The package works without it (a pure-Python fallback is selected at
import time); set PROFCCT_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PROFCCT_NO_EXT", "0") in ("", "0"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "profcct._kernels._ext",
                    ["src/profcct/_kernels/_ext.pyx"],
                    language="c++",
                    extra_compile_args=["-O2", "-std=c++11"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
