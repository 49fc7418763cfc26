"""Build script for the optional compiled kernel extension.

The package works without the extension (a NumPy reference backend is
selected at import time); building it just makes the hot per-step loops
faster. No -ffast-math and no -march flags: kernel results must be
bit-identical to the reference backend.
"""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "magnetworks._kernels._core",
                ["src/magnetworks/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
