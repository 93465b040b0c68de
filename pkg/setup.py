"""Build script: compiles the optional fast counting kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so the Cython build is best-effort: missing Cython or a
missing C compiler degrades to a pure-Python install instead of failing.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/sapprox/_kernel/_fast.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
