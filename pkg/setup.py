"""Build script for the optional compiled pairwise kernel.

The package works without the extension (a numpy fallback is selected at
import time), so compilation failures are non-fatal.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "effpred._pairwise",
                sources=["src/effpred/_pairwise.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython/numpy unavailable at build time; building without the compiled kernel.")

setup(ext_modules=ext_modules)
