"""Build the optional compiled kernels.

The package works without them (a pure-numpy fallback is selected at
import time), so a failed extension build only costs speed.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "blbkit._kernels._speedups",
                ["src/blbkit/_kernels/_speedups.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    import warnings

    warnings.warn("Cython/numpy unavailable; installing without compiled kernels")
    extensions = []

setup(ext_modules=extensions)
