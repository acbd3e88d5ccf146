# Builds the optional Cython kernels; the package falls back to numpy
# implementations when the extension is absent.
import os

from setuptools import setup

ext_modules = []
if os.environ.get("BLANCH_BENCH_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "blanch_bench._kernels",
                    ["src/blanch_bench/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
