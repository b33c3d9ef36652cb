"""Builds the optional compiled kernels.

Set ECHOSCAFFOLD_NO_EXT=1 to skip the extension; the package then runs on
the numpy fallback kernels.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ECHOSCAFFOLD_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "echoscaffold._ckernels",
                    ["src/echoscaffold/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no fast-math / contraction: results must match the fallback bit for bit
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
