"""Build the compiled imaging kernels.

The extension is optional: when Cython or a C compiler is unavailable the
package installs without it and ``rosar.imaging`` falls back to the numpy
kernels.
"""

import os
import sys

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ROSAR_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not found; building without compiled kernels", file=sys.stderr)
    else:
        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        extensions = [
            Extension(
                "rosar.imaging._ckernels",
                ["src/rosar/imaging/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
