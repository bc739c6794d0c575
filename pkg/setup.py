"""Build the optional Cython kernels; the package falls back to pure Python without them."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("MINTLOC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "mintloc._kernels._ckernels",
                    ["src/mintloc/_kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
