"""Build script for the optional compiled kernel.

The extension is marked optional: if no compiler (or no Cython) is
available the install still succeeds and ``relocc`` runs on the pure
numpy fallback selected at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "relocc._kernels",
        ["src/relocc/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize(
        [ext], compiler_directives={"language_level": "3"}
    )

setup(ext_modules=ext_modules)
