"""Build script for the optional compiled kernel.

The package works without the extension (a NumPy implementation of the same
kernels is selected at import time), so a failed compile only costs speed.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "critfield._kernels",
                ["src/critfield/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-fopenmp"],
                extra_link_args=["-fopenmp"],
                define_macros=[
                    ("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"),
                    ("_GNU_SOURCE", "1"),
                ],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
