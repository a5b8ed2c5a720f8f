"""Build script for the compiled integrator core.

The package is fully functional without the extension (a scipy-based
fallback is selected at import time); building it just makes the
eigenfunction sweeps a lot faster.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "bqscatter._fastpath",
        ["src/bqscatter/_fastpath.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
