"""Build script for the compiled prox kernels.

The extension is optional at runtime: binopt falls back to a pure-numpy
backend when the compiled module is missing (see binopt.cubic).
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "binopt._prox_kernels",
    sources=["src/binopt/_prox_kernels.pyx"],
    include_dirs=[np.get_include()],
    # -ffp-contract=off keeps the compiled kernel bit-identical to the
    # numpy fallback (no FMA contraction of the root formulas).
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
