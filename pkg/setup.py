"""Build script for the optional compiled kernels.

The package works without the extension: oneirotax.kernels falls back to a
pure-numpy implementation at import time. Set ONEIROTAX_PURE=1 to skip the
extension build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ONEIROTAX_PURE"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "oneirotax.kernels._kernels",
                    ["src/oneirotax/kernels/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
