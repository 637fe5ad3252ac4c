"""Build script for the optional compiled event-loop core.

The extension is marked optional: if no C compiler (or Cython) is available,
installation still succeeds and the package falls back to the pure-Python
engine at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "fragsim._kernels",
                ["src/fragsim/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
