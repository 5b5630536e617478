"""Build script for the optional compiled kernels.

The package works without the extensions (a numpy fallback is selected at
import time); building them just makes convolution and ray casting faster.
Compiled without -ffast-math / -march=native so both backends produce
bit-identical float32 results.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "uqsynth.backends._conv_cy",
        ["src/uqsynth/backends/_conv_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    ),
    Extension(
        "uqsynth.backends._render_cy",
        ["src/uqsynth/backends/_render_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    ),
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": 3}),
)
