"""Build the optional compiled kernels.

The package works without them: ``quasicompact._kernels`` falls back to the
NumPy implementations when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QUASICOMPACT_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext = Extension(
            "quasicompact._ckernels",
            ["src/quasicompact/_ckernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize(
            [ext], language_level=3,
            compiler_directives={"boundscheck": False, "wraparound": False, "cdivision": True},
        )

setup(ext_modules=ext_modules)
