"""Build script: compiles the optional Cython solver kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time), so the build is marked optional and failures are non-fatal.
"""

from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
    import numpy as np

    extensions = cythonize(
        [
            Extension(
                "emomix.learners._kernels",
                ["src/emomix/learners/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
